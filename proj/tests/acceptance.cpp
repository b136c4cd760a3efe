// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "specflow/flow.hpp"
#include "specflow/verify.hpp"

using namespace specflow;

namespace {

struct Criterion {
    int id;
    std::string title;
    bool pass;
    std::string detail;
};

std::vector<Criterion> results;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
    results.push_back({id, title, pass, detail});
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " ("
              << detail << ")\n"
              << std::flush;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(3) << x;
    return os.str();
}

// ---- 1: eigensolver exactness against the closed form --------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int n : {3, 16, 64}) {
        auto space = MeasureSpace::uniform(n);
        auto form = build_operator(OperatorSpec::path_dirichlet(n, 1.0), space);
        auto spec = eigensolve(form, PotentialField(Vector::Zero(n), space, 0.0), n);
        for (int k = 1; k <= n; ++k) {
            const double exact = oracles::path_dirichlet_eigenvalue(n, 1.0, k);
            worst = std::max(worst, std::abs(spec.lambdas(k - 1) - exact) / exact);
        }
    }
    const double wall = seconds_since(t0);
    report(1, "eigensolver exactness on Dirichlet paths", worst <= 1e-10 && wall < 1.0,
           "worst rel err " + fmt(worst) + ", " + fmt(wall) + " s");
}

// ---- 2: resolvent spectral map -------------------------------------------

void criterion_2() {
    std::mt19937_64 rng(202);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    const int sizes[] = {3, 8, 16, 32, 64};
    for (int trial = 0; trial < 50; ++trial) {
        const int d = sizes[trial % 5];
        Vector m(d), V(d);
        for (int i = 0; i < d; ++i) {
            m(i) = 0.5 + unif(rng);
            V(i) = 2.0 * gauss(rng);
        }
        auto space = std::make_shared<const MeasureSpace>(m);
        auto form = build_operator(OperatorSpec::path_dirichlet(d, 1.0), space);
        PotentialField Vf(V, space);
        const double lambda_min = form.alpha() + Vf.lower_bound;
        const double beta = std::abs(lambda_min) + 0.5 + 10.0 * unif(rng);
        auto rep = resolvent_relation_check(form, Vf, beta);
        worst = std::max(worst, rep.worst_violation);
    }
    report(2, "resolvent eigenvalues equal reciprocals of the shifted spectrum", worst <= 1e-9,
           "50 pairs, worst rel err " + fmt(worst));
}

// ---- 3: spectral property suite ------------------------------------------

void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    auto space = MeasureSpace::uniform(64);
    auto form = build_operator(OperatorSpec::path_dirichlet(64, 1.0), space);
    auto K = ConstraintFunctional::box_mean(-1.0, 1.0, 0.0);
    SuiteOptions opts;
    opts.samples = 100;
    opts.J = 4;
    opts.seed = 303;
    auto reports = spectral_suite(form, K, opts);
    const double wall = seconds_since(t0);
    double worst = 0.0;
    bool pass = wall < 30.0;
    for (const auto& r : reports) {
        worst = std::max(worst, r.worst_violation);
        pass = pass && r.verdict == Verdict::pass && r.worst_violation <= 1e-9;
    }
    report(3, "monotonicity, concavity, min-max, weak majorization at d=64", pass,
           "worst violation " + fmt(worst) + ", " + fmt(wall) + " s");
}

// ---- 4: frame invariance on degenerate instances -------------------------

void criterion_4() {
    double worst = 0.0;
    bool pass = true;
    {
        auto space = MeasureSpace::uniform(5);
        auto op = build_operator(OperatorSpec::dense(Matrix::Zero(5, 5)), space);
        PotentialField V(Vector{{1.0, 1.0, 1.0, 2.0, 3.0}}, space, 0.0);
        auto r = frame_invariance_check(op, V, 100, 404);
        pass = pass && r.verdict == Verdict::pass;
        worst = std::max(worst, r.worst_violation);
    }
    {
        // Symmetric 2d grid: modes (a,b) and (b,a) are exactly degenerate.
        auto space = MeasureSpace::uniform(16);
        auto form = build_operator(OperatorSpec::grid2d_dirichlet(4, 1.0), space);
        PotentialField V(Vector::Zero(16), space, 0.0);
        auto r = frame_invariance_check(form, V, 100, 405);
        pass = pass && r.verdict == Verdict::pass;
        worst = std::max(worst, r.worst_violation);
    }
    report(4, "squared-frame sums are invariant under intra-cluster rotations",
           pass && worst <= 1e-9, "100 rotations each, worst deviation " + fmt(worst));
}

// ---- 5: linear upper bound for partial eigenvalue sums -------------------

void criterion_5() {
    std::mt19937_64 rng(505);
    auto space = MeasureSpace::uniform(16);
    auto form = build_operator(OperatorSpec::path_dirichlet(16, 1.0), space);
    auto K = ConstraintFunctional::box_mean(-2.0, 2.0, -0.5);
    double worst = -kInf;
    for (int trial = 0; trial < 200; ++trial) {
        const Vector V = K.sample_domain(*space, rng, trial % 2 == 0);
        const Vector W = K.sample_domain(*space, rng, trial % 3 == 0);
        const int k = 1 + static_cast<int>(rng() % 4);
        worst = std::max(worst, linear_bound_check(form, PotentialField(V, space, -2.0),
                                                   PotentialField(W, space, -2.0), k));
    }
    report(5, "frame sums bound sigma_k differences from above", worst <= 1e-9,
           "200 admissible pairs, worst residual " + fmt(worst));
}

// ---- 6: finite-difference subgradient chain rule --------------------------

void criterion_6() {
    std::mt19937_64 rng(606);
    auto space = MeasureSpace::uniform(16);
    auto form = build_operator(OperatorSpec::path_dirichlet(16, 1.0), space);
    auto K = ConstraintFunctional::box_mean(-1.0, 1.0, 0.0);
    auto obj = SpectralObjective::sum_first_k(2, 2);
    double worst = 0.0;
    int conclusive = 0, inconclusive = 0;
    bool pass = true;
    for (int base = 0; base < 20; ++base) {
        const Vector V = K.sample_domain(*space, rng, base % 2 == 0);
        auto r = gradient_fd_check(form, obj, PotentialField(V, space, -1.0), 1e-6,
                                   700 + base);
        if (r.verdict == Verdict::inconclusive) {
            ++inconclusive;  // only raised below the hard-wired gap threshold
            continue;
        }
        ++conclusive;
        worst = std::max(worst, r.worst_violation);
        pass = pass && r.verdict == Verdict::pass;
    }
    pass = pass && conclusive >= 15;
    report(6, "finite differences of H match the weighted subgradient", pass,
           std::to_string(conclusive) + " conclusive bases, worst rel err " + fmt(worst) + ", " +
               std::to_string(inconclusive) + " inconclusive");
}

// ---- 7: projection correctness --------------------------------------------

void criterion_7() {
    std::mt19937_64 rng(707);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_qp = 0.0, worst_exp = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 5);
        Vector m(d), W1(d), W2(d);
        for (int i = 0; i < d; ++i) {
            m(i) = 0.25 + 2.0 * unif(rng);
            W1(i) = 2.5 * gauss(rng);
            W2(i) = 2.5 * gauss(rng);
        }
        auto space = std::make_shared<const MeasureSpace>(m);
        const double v0 = -0.5 + 1.25 * unif(rng);
        auto K = ConstraintFunctional::box_mean(-1.0, 1.0, v0);
        auto P1 = K.prox(1.0, PotentialField(W1, space, -1.0));
        auto P2 = K.prox(1.0, PotentialField(W2, space, -1.0));
        const Vector oracle = oracles::box_mean_projection_bruteforce(W1, m, -1.0, 1.0, v0);
        worst_qp = std::max(worst_qp, (P1.V.values - oracle).cwiseAbs().maxCoeff());
        worst_exp = std::max(worst_exp, dist_m(P1.V.values, P2.V.values, *space) -
                                            dist_m(W1, W2, *space));
    }
    report(7, "box-mean projections match the enumerated QP and are nonexpansive",
           worst_qp <= 1e-9 && worst_exp <= 1e-9,
           "500 trials, worst QP gap " + fmt(worst_qp) + ", worst expansion " + fmt(worst_exp));
}

// ---- flows shared by criteria 8-11 ----------------------------------------

struct NamedRun {
    std::string name;
    double tau;
    FlowTrajectory traj;
};

std::vector<NamedRun> shared_runs;
FlowTrajectory bang_bang_traj;
double bang_bang_wall = 0.0;

void execute_flows() {
    {  // ground-state flow to the two-level structure (criterion 10)
        const int n = 64;
        auto space = MeasureSpace::uniform(n);
        auto form = build_operator(OperatorSpec::path_dirichlet(n, 1.0 / 65.0), space);
        auto K = ConstraintFunctional::box_mean(-1.0, 1.0, 0.0);
        auto obj = SpectralObjective::sum_first_k(1);
        PotentialField V0(Vector::Zero(n), space, -1.0);
        FlowConfig cfg;
        cfg.tau = 2.0;
        cfg.T = 800.0;
        cfg.seed = 808;
        cfg.stationarity_probes = 200;
        const auto t0 = std::chrono::steady_clock::now();
        bang_bang_traj = run_flow(form, K, obj, V0, cfg);
        bang_bang_wall = seconds_since(t0);
        shared_runs.push_back({"ground-state box-mean", cfg.tau, bang_bang_traj});
    }
    {  // budget-constrained two-eigenvalue flow
        const int n = 16;
        auto space = MeasureSpace::uniform(n);
        auto form = build_operator(OperatorSpec::path_dirichlet(n, 1.0), space);
        auto K = ConstraintFunctional::psi_budget(PsiKind::exponential, 1.0, std::exp(-1.0));
        auto obj = SpectralObjective::sum_first_k(2, 2);
        PotentialField V0(Vector::Constant(n, 1.5), space, 0.0);
        FlowConfig cfg;
        cfg.tau = 0.05;
        cfg.T = 2.0;
        cfg.seed = 809;
        cfg.stationarity_probes = 200;
        shared_runs.push_back({"exponential budget", cfg.tau, run_flow(form, K, obj, V0, cfg)});
    }
    {  // quadratically tilted constraint, theta > 0
        const int n = 12;
        auto space = MeasureSpace::uniform(n);
        auto form = build_operator(OperatorSpec::path_dirichlet(n, 1.0), space);
        auto K = ConstraintFunctional::tilted_box(-1.0, 1.0, Vector::Constant(12, 0.3), 0.8);
        auto obj = SpectralObjective::sum_first_k(2, 2);
        PotentialField V0(Vector::Zero(n), space, -1.0);
        FlowConfig cfg;
        cfg.tau = 0.1;
        cfg.T = 3.0;
        cfg.seed = 810;
        cfg.stationarity_probes = 200;
        shared_runs.push_back({"tilted box", cfg.tau, run_flow(form, K, obj, V0, cfg)});
    }
}

// ---- 8: discrete energy inequality along every run -------------------------

void criterion_8() {
    double worst_step = -kInf, worst_sup = -kInf;
    for (const auto& run : shared_runs) {
        double F_prev = run.traj.F0;
        for (const auto& s : run.traj.steps) {
            worst_step = std::max(
                worst_step, s.F + s.step_norm * s.step_norm / (2.0 * run.tau) - F_prev);
            worst_sup = std::max(worst_sup, s.F - run.traj.F0);
            F_prev = s.F;
        }
    }
    report(8, "one-step energy inequality and global energy bound",
           worst_step <= 1e-9 && worst_sup <= 1e-9,
           std::to_string(shared_runs.size()) + " runs, worst step residual " + fmt(worst_step) +
               ", worst sup excess " + fmt(worst_sup));
}

// ---- 9: stationarity decomposition where the gap holds ---------------------

void criterion_9() {
    double worst = -kInf;
    long counted = 0;
    for (const auto& run : shared_runs) {
        for (const auto& s : run.traj.steps) {
            if (!s.gap_ok) continue;
            ++counted;
            worst = std::max(worst, s.stationarity_residual);
        }
    }
    report(9, "subgradient decomposition certified on strict-gap steps",
           counted > 0 && worst <= 1e-7,
           std::to_string(counted) + " steps, worst residual " + fmt(worst));
}

// ---- 10: two-level terminal structure ---------------------------------------

void criterion_10() {
    const Vector& VT = bang_bang_traj.terminal();
    const int n = static_cast<int>(VT.size());
    int at_bounds = 0;
    for (int i = 0; i < n; ++i)
        if (std::min(std::abs(VT(i) - 1.0), std::abs(VT(i) + 1.0)) <= 1e-3) ++at_bounds;
    const double frac = static_cast<double>(at_bounds) / n;
    const double stat = bang_bang_traj.steps.back().stationarity_residual;
    const bool pass = frac >= 0.9 && stat <= 1e-6 && bang_bang_wall < 120.0;
    report(10, "ground-state flow reaches a two-level potential", pass,
           std::to_string(at_bounds) + "/" + std::to_string(n) + " nodes at the bounds, final "
           "stationarity " + fmt(stat) + ", " + fmt(bang_bang_wall) + " s");
}

// ---- 11: step-size refinement consistency -----------------------------------

void criterion_11() {
    const int n = 16;
    auto space = MeasureSpace::uniform(n);
    auto form = build_operator(OperatorSpec::path_dirichlet(n, 1.0), space);
    auto K = ConstraintFunctional::box_mean(-5.0, 5.0, 0.0);
    auto obj = SpectralObjective::sum_first_k(1);
    PotentialField V0(Vector::Zero(n), space, -5.0);
    auto terminal = [&](double tau) {
        FlowConfig cfg;
        cfg.tau = tau;
        cfg.T = 0.5;
        cfg.seed = 811;
        cfg.inner_tol = 1e-12;
        cfg.stationarity_probes = 4;
        FlowTrajectory traj = run_flow(form, K, obj, V0, cfg);
        shared_runs.push_back({"refinement tau=" + fmt(tau), tau, traj});
        return traj.terminal();
    };
    const Vector a = terminal(1e-2);
    const Vector b = terminal(5e-3);
    const Vector c = terminal(2.5e-3);
    const Vector d = terminal(1.25e-3);
    const double e1 = norm_m(a - b, *space);
    const double e2 = norm_m(b - c, *space);
    const double e3 = norm_m(c - d, *space);
    const double order12 = std::log2(e1 / e2), order23 = std::log2(e2 / e3);
    const bool linear = e1 <= 0.1 * 1e-2 && e2 <= 0.1 * 5e-3 && e3 <= 0.1 * 2.5e-3;
    const bool pass = linear && order12 >= 0.9 && order23 >= 0.9;
    report(11, "halved steps move the terminal potential at first order", pass,
           "gaps " + fmt(e1) + "/" + fmt(e2) + "/" + fmt(e3) + ", orders " + fmt(order12) + ", " +
               fmt(order23));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    execute_flows();
    criterion_11();  // adds its runs to the shared pool checked by 8
    criterion_8();
    criterion_9();
    criterion_10();

    int failures = 0;
    for (const auto& r : results) failures += r.pass ? 0 : 1;
    std::cout << (failures == 0 ? "all criteria passed"
                                : std::to_string(failures) + " criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
