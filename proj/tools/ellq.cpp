// ellq: elliptic relaxation experiments from the command line.
#include "ellq/config.hpp"
#include "ellq/error.hpp"
#include "ellq/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

int run(const std::string& command, const ellq::RunConfig& config) {
    if (command == "relax") return ellq::cmd_relax(config, std::cout);
    if (command == "stop") return ellq::cmd_stop(config, std::cout);
    if (command == "sweep") return ellq::cmd_sweep(config, std::cout);
    if (command == "spectral") return ellq::cmd_spectral(config, std::cout);
    return ellq::cmd_report(config, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Residual-monitored relaxation solver for P1 Poisson problems"};
    std::string command;
    app.add_option("command", command, "relax | stop | sweep | report | spectral")
        ->required()
        ->check(CLI::IsMember({"relax", "stop", "sweep", "report", "spectral"}));

    // raw strings; conversion and range checks live in apply_setting/validate
    std::map<std::string, std::string> raw;
    const std::pair<const char*, const char*> flags[] = {
        {"n", "mesh cells per side"},
        {"rhs", "load case: I, II, III, IV or manufactured"},
        {"eps", "target relative accuracy"},
        {"p0", "residual-probability entry threshold"},
        {"shots", "Bernoulli shots per checkpoint"},
        {"seed", "random seed"},
        {"t-max", "evolution horizon"},
        {"theta", "RK4 step as a fraction of 1/(1+||G||)"},
        {"out", "output directory"},
    };
    for (const auto& [name, help] : flags) app.add_option(std::string("--") + name, raw[name], help);
    std::string config_path;
    app.add_option("--config", config_path, "flat key = value file; flags override it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ellq::RunConfig config;
        if (!config_path.empty()) {
            for (const auto& [key, value] : ellq::read_config_file(config_path)) {
                ellq::apply_setting(config, key, value);
            }
        }
        for (const auto& [name, help] : flags) {
            if (app.count(std::string("--") + name) > 0) ellq::apply_setting(config, name, raw[name]);
        }
        ellq::validate(config);
        return run(command, config);
    } catch (const ellq::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const ellq::InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return 2;
    } catch (const ellq::SizeLimitExceeded& e) {
        std::cerr << "size limit: " << e.what() << " (raise ELLQ_DENSE_CEILING)\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
