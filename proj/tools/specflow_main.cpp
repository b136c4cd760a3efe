#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "specflow/run_config.hpp"

namespace {

using nlohmann::json;

struct Overrides {
    double tau = 0.0;
    double T = 0.0;
    std::int64_t seed = -1;
    std::string out;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw specflow::ConfigError("cannot open config file '" + path + "'");
    json j;
    in >> j;
    return j;
}

void apply_overrides(json& j, const Overrides& ov) {
    if (ov.tau > 0.0) j["flow"]["tau"] = ov.tau;
    if (ov.T > 0.0) j["flow"]["T"] = ov.T;
    if (ov.seed >= 0) j["flow"]["seed"] = static_cast<std::uint64_t>(ov.seed);
    if (!ov.out.empty()) j["output_dir"] = ov.out;
}

std::vector<double> parse_sweep(const std::string& sweep) {
    const std::string prefix = "tau=";
    if (sweep.rfind(prefix, 0) != 0)
        throw specflow::ConfigError("--sweep expects the form tau=a,b,c");
    std::vector<double> values;
    std::stringstream ss(sweep.substr(prefix.size()));
    std::string tok;
    while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
    if (values.empty()) throw specflow::ConfigError("--sweep got an empty value list");
    return values;
}

int run_one(json j, specflow::RunMode mode, bool gnuplot) {
    specflow::RunConfig cfg = specflow::parse_config_json(j);
    return specflow::run_command(cfg, mode, gnuplot);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient flows of eigenvalue functionals of discrete Schroedinger potentials"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::string sweep;
    bool gnuplot = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "JSON run configuration")->required();
        cmd->add_option("--tau", ov.tau, "override flow.tau");
        cmd->add_option("--T", ov.T, "override flow.T");
        cmd->add_option("--seed", ov.seed, "override flow.seed");
        cmd->add_option("--out", ov.out, "override output directory");
    };

    CLI::App* flow = app.add_subcommand("flow", "run the minimizing-movement flow");
    add_common(flow);
    flow->add_option("--sweep", sweep, "run independent flows for tau=a,b,c in parallel");
    flow->add_flag("--gnuplot", gnuplot, "also write a gnuplot script");

    CLI::App* verify = app.add_subcommand("verify", "run the property suites on the instance");
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    try {
        json base = load_json(config_path);
        apply_overrides(base, ov);
        const specflow::RunMode mode =
            app.got_subcommand(flow) ? specflow::RunMode::flow : specflow::RunMode::verify;

        if (mode == specflow::RunMode::flow && !sweep.empty()) {
            const std::vector<double> taus = parse_sweep(sweep);
            const std::string root =
                base.contains("output_dir") ? base["output_dir"].get<std::string>() : "out";
            std::vector<int> codes(taus.size(), 0);
            std::vector<std::thread> workers;
            for (std::size_t i = 0; i < taus.size(); ++i) {
                json j = base;
                j["flow"]["tau"] = taus[i];
                std::ostringstream sub;
                sub << root << "/tau_" << taus[i];
                j["output_dir"] = sub.str();
                workers.emplace_back([j, &codes, i, gnuplot]() {
                    codes[i] = run_one(j, specflow::RunMode::flow, gnuplot);
                });
            }
            for (auto& w : workers) w.join();
            int status = 0;
            for (int c : codes) status = std::max(status, c);
            return status;
        }
        return run_one(base, mode, gnuplot);
    } catch (const specflow::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
