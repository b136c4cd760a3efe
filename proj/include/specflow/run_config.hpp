#pragma once

#include <json.hpp>

#include "specflow/flow.hpp"

namespace specflow {

// Parsed and cross-validated run configuration. Parsing is strict: unknown
// keys are errors, and validation reports every problem found, not just
// the first.
struct RunConfig {
    OperatorSpec operator_spec;

    double measure_uniform = 1.0;
    std::string measure_file;  // per-node weights, one value per line

    struct ObjectiveSpec {
        std::string name = "sum_first_k";
        int k = 1;       // sum_first_k / elementary_symmetric_2
        int j = 2;       // gap_penalty
        int J = 0;       // 0: builtin default depth
        double growth_A = std::numeric_limits<double>::quiet_NaN();
    } objective;

    struct ConstraintSpec {
        std::string kind = "box_mean";
        double V_minus = -1.0, V_plus = 1.0, v0 = 0.0;
        std::string psi = "exponential";
        double beta = 1.0, budget = 0.5;
        double theta = 0.0;
        std::vector<double> tilt;  // size d, size 1 (broadcast), or empty (zero)
    } constraint;

    FlowConfig flow;

    struct InitialSpec {
        std::string kind = "constant";  // constant | file | random
        double value = 0.0;
        std::string path;
    } initial;

    std::string output_dir = "out";

    nlohmann::json normalized;  // canonical echo, reparses to an equal config
};

bool operator==(const RunConfig& a, const RunConfig& b);

// A run configuration resolved into working objects.
struct Instance {
    SpacePtr space;
    BilinearForm form;
    ConstraintFunctional K;
    SpectralObjective objective;
    PotentialField V0;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

Instance build_instance(const RunConfig& config);

enum class RunMode { flow, verify };

// Executes a full run. Exit status: 0 success, 1 verification failure,
// 2 configuration error, 3 numeric/IO failure.
int run_command(const RunConfig& config, RunMode mode, bool gnuplot = false);

}  // namespace specflow
