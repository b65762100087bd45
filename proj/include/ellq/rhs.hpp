#pragma once

#include "ellq/fem.hpp"

#include <string>
#include <vector>

namespace ellq {

/// Benchmark right-hand sides: "I", "II", "III", "IV" and "manufactured".
/// The manufactured load is -Laplace(u_ex) and coincides with case III.
struct RhsCase {
    std::string label;
    ScalarField f;
};

/// Throws InvalidParameter for an unknown label.
[[nodiscard]] RhsCase rhs_case(const std::string& label);

[[nodiscard]] const std::vector<std::string>& benchmark_labels();

/// u_ex = sin(pi x) sin(pi y) + 1/2 sin(3 pi x) sin(2 pi y) + 1/4 sin(5 pi x) sin(4 pi y)
[[nodiscard]] double manufactured_solution(double x, double y);

}  // namespace ellq
