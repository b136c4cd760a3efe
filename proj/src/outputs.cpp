#include "specflow/outputs.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>

namespace specflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
    std::array<char, 64> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

namespace {

struct CoordColumns {
    std::vector<std::string> names;          // e.g. {"x"} or {"x","y"}
    std::vector<std::vector<double>> values; // one vector per column
};

CoordColumns node_coordinates(const OperatorSpec& spec) {
    switch (spec.kind) {
        case OperatorKind::path_dirichlet:
        case OperatorKind::weighted_edge: {
            CoordColumns c{{"x"}, {{}}};
            for (int i = 0; i < spec.n; ++i) c.values[0].push_back((i + 1) * spec.h);
            return c;
        }
        case OperatorKind::path_neumann: {
            CoordColumns c{{"x"}, {{}}};
            for (int i = 0; i < spec.n; ++i) c.values[0].push_back(i * spec.h);
            return c;
        }
        case OperatorKind::grid2d_dirichlet: {
            CoordColumns c{{"x", "y"}, {{}, {}}};
            for (int i = 0; i < spec.n; ++i)
                for (int j = 0; j < spec.n; ++j) {
                    c.values[0].push_back((i + 1) * spec.h);
                    c.values[1].push_back((j + 1) * spec.h);
                }
            return c;
        }
        case OperatorKind::fractional:
            if (spec.base) return node_coordinates(*spec.base);
            return {};
        case OperatorKind::dense:
            return {};
    }
    return {};
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw NumericError("cannot write '" + path + "'");
    return out;
}

void write_snapshot(const std::string& path, const Vector& V, const CoordColumns& coords) {
    std::ofstream out = open_for_write(path);
    out << "index";
    for (const auto& name : coords.names) out << "," << name;
    out << ",V\n";
    for (int i = 0; i < V.size(); ++i) {
        out << i;
        for (const auto& col : coords.values) out << "," << format_double(col[i]);
        out << "," << format_double(V(i)) << "\n";
    }
    if (!out) throw NumericError("write failed for '" + path + "'");
}

}  // namespace

EmitInfo emit_outputs(const FlowTrajectory& traj, const std::string& dir, const RunConfig& config,
                      double wall_seconds, bool gnuplot) {
    EmitInfo info;
    info.wall_seconds = wall_seconds;
    fs::create_directories(fs::path(dir) / "snapshots");

    const int lambda_count = traj.steps.empty() ? 0 : static_cast<int>(traj.steps[0].lambdas.size());
    {
        const std::string path = (fs::path(dir) / "trajectory.csv").string();
        std::ofstream out = open_for_write(path);
        out << "t,F,H,K";
        for (int k = 1; k <= lambda_count; ++k) out << ",lambda_" << k;
        out << ",step_norm,stat_residual,gap_ok,inner_iters\n";
        for (const auto& s : traj.steps) {
            out << format_double(s.t) << "," << format_double(s.F) << "," << format_double(s.H)
                << "," << format_double(s.K);
            for (int k = 0; k < lambda_count; ++k) out << "," << format_double(s.lambdas(k));
            out << "," << format_double(s.step_norm) << ","
                << format_double(s.stationarity_residual) << "," << (s.gap_ok ? 1 : 0) << ","
                << s.inner_iterations << "\n";
        }
        if (!out) throw NumericError("write failed for '" + path + "'");
        info.files.push_back(path);
    }

    const CoordColumns coords = node_coordinates(config.operator_spec);
    const int N = traj.step_count();
    for (int n = 0; n <= N; ++n) {
        if (n % config.flow.record_every != 0 && n != N) continue;
        const std::string path =
            (fs::path(dir) / "snapshots" / ("V_" + std::to_string(n) + ".csv")).string();
        write_snapshot(path, traj.snapshots[n], coords);
        info.files.push_back(path);
    }

    {
        const std::string path = (fs::path(dir) / "summary.json").string();
        std::ofstream out = open_for_write(path);
        json summary;
        summary["config"] = config.normalized;
        summary["steps"] = N;
        summary["terminal_F"] = traj.steps.empty() ? 0.0 : traj.steps.back().F;
        summary["initial_F"] = traj.F0;
        summary["total_dissipation"] = traj.total_dissipation();
        summary["edi_residual_decreasing"] = traj.edi_residual_decreasing();
        summary["edi_residual_increasing"] = traj.edi_residual_increasing();
        summary["max_stationarity_residual"] = traj.max_stationarity_residual();
        summary["wall_seconds"] = wall_seconds;
        summary["seed"] = config.flow.seed;
        summary["warnings"] = traj.warnings;
        out << summary.dump(2) << "\n";
        if (!out) throw NumericError("write failed for '" + path + "'");
        info.files.push_back(path);
    }

    if (gnuplot) {
        const std::string path = (fs::path(dir) / "plot.gp").string();
        std::ofstream out = open_for_write(path);
        out << "set datafile separator ','\n"
            << "set terminal pngcairo size 1200,500\n"
            << "set output 'flow.png'\n"
            << "set multiplot layout 1,2\n"
            << "set xlabel 't'\n"
            << "set ylabel 'F'\n"
            << "plot 'trajectory.csv' using 1:2 with lines title 'F(t)'\n"
            << "set xlabel 'node'\n"
            << "set ylabel 'V'\n"
            << "plot 'snapshots/V_" << N << ".csv' using 1:" << (2 + coords.names.size())
            << " with linespoints title 'terminal potential'\n"
            << "unset multiplot\n";
        if (!out) throw NumericError("write failed for '" + path + "'");
        info.files.push_back(path);
    }
    return info;
}

}  // namespace specflow
