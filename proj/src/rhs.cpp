#include "ellq/rhs.hpp"

#include "ellq/error.hpp"

#include <cmath>
#include <numbers>

namespace ellq {

namespace {

constexpr double kPi = std::numbers::pi;

double mode(int kx, int ky, double x, double y) {
    return std::sin(kx * kPi * x) * std::sin(ky * kPi * y);
}

double f_one(double x, double y) { return 2.0 * kPi * kPi * mode(1, 1, x, y); }

double f_two(double x, double y) { return f_one(x, y) + 2.5 * kPi * kPi * mode(2, 1, x, y); }

double f_three(double x, double y) {
    return f_one(x, y) + 6.5 * kPi * kPi * mode(3, 2, x, y) + 10.25 * kPi * kPi * mode(5, 4, x, y);
}

double f_four(double x, double y) {
    const double dx = x - 0.5;
    const double dy = y - 0.5;
    return std::exp(-(dx * dx + dy * dy) / 0.01);
}

}  // namespace

double manufactured_solution(double x, double y) {
    return mode(1, 1, x, y) + 0.5 * mode(3, 2, x, y) + 0.25 * mode(5, 4, x, y);
}

RhsCase rhs_case(const std::string& label) {
    if (label == "I") return {label, f_one};
    if (label == "II") return {label, f_two};
    if (label == "III" || label == "manufactured") return {label, f_three};
    if (label == "IV") return {label, f_four};
    throw InvalidParameter("unknown right-hand side '" + label + "' (expected I, II, III, IV or manufactured)");
}

const std::vector<std::string>& benchmark_labels() {
    static const std::vector<std::string> labels{"I", "II", "III", "IV"};
    return labels;
}

}  // namespace ellq
