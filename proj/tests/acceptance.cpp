// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mixneu/analysis.hpp"
#include "mixneu/error.hpp"
#include "mixneu/report.hpp"
#include "mixneu/spectral.hpp"

using namespace mixneu;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const PiecewiseField kSignChanging{{0.0, 0.25, 1.0}, {1.0, -1.0}, FieldRole::Weight};

// Admissible runs: two-signed weights with nonzero integral over a spread of operators.
struct Case {
    OperatorParams op;
    PiecewiseField m;
};

std::vector<Case> admissible_cases() {
    const PiecewiseField three{{0.0, 0.3, 0.7, 1.0}, {-2.0, 1.5, -0.5}, FieldRole::Weight};
    const PiecewiseField mostly_pos{{0.0, 0.6, 1.0}, {1.0, -0.4}, FieldRole::Weight};
    return {
        {{1.0, 0.0, 0.5, 1}, kSignChanging}, {{1.0, 1.0, 0.5, 1}, kSignChanging},
        {{0.0, 1.0, 0.5, 1}, kSignChanging}, {{0.0, 1.0, 0.2, 1}, three},
        {{0.3, 1.0, 0.8, 1}, three},         {{2.0, 0.5, 0.35, 1}, mostly_pos},
    };
}

AssembledForms forms_for(const Case& c, int n_in, int n_col) {
    return assemble(c.op, build_mesh(0.0, 1.0, n_in, 1.0, n_col), c.m);
}

Eigen::MatrixXd active_block(const AssembledForms& f, const Eigen::MatrixXd& A) {
    const auto idx = f.active_indices();
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = A(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                          static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Outcome classical_limit() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig c;
    c.task = "convergence";
    c.geometry = {0.0, 1.0, 512, 1.0, 8};
    c.op = {1.0, 0.0, 0.5, 1};
    c.weight = PiecewiseField::constant(0.0, 1.0, 1.0);
    c.k_pos = 5;
    c.k_neg = 0;
    c.diagnostic = true;
    c.levels = {128, 256, 512};
    const Report r = run(c);
    const double elapsed = seconds_since(t0);
    const ConvergenceRow& fine = r.convergence.back();
    o.require(fine.n_in == 512 && fine.lambdas.size() == 5, "expected 5 eigenvalues at n_in = 512");
    double worst = 0.0;
    for (std::size_t k = 0; k < fine.lambdas.size(); ++k) {
        const double exact = (k + 1.0) * (k + 1.0) * kPi * kPi;
        worst = std::max(worst, std::abs(fine.lambdas[k] - exact) / exact);
    }
    const double order = r.observed_order.empty() ? 0.0 : r.observed_order.front();
    o.require(worst < 1e-3, fmt("max rel err %.3g", worst));
    o.require(std::abs(order - 2.0) <= 0.3, fmt("order %.3f", order));
    o.require(elapsed < 30.0, fmt("runtime %.1fs", elapsed));
    o.detail = fmt("max rel err %.2e, order %.3f, %.2fs", worst, order, elapsed) +
               (o.pass ? "" : " -- " + o.detail);
    return o;
}

Outcome zero_eigenvalue() {
    Outcome o;
    double worst_lambda = 0.0;
    double worst_dev = 0.0;
    for (const Case& c : admissible_cases()) {
        const AssembledForms f = forms_for(c, 48, 16);
        const Spectrum spec = solve_spectrum(f, 3, 3);
        double max_abs = 0.0;
        for (const auto& e : spec.positives) max_abs = std::max(max_abs, std::abs(e.lambda));
        for (const auto& e : spec.negatives) max_abs = std::max(max_abs, std::abs(e.lambda));
        worst_lambda = std::max(worst_lambda, std::abs(spec.zero.lambda) / max_abs);
        // The kernel of B on the active DOFs, found independently of the
        // injected pair, must be the constants.
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(active_block(f, f.B));
        const Eigen::VectorXd v = es.eigenvectors().col(0);
        const double lam = std::abs(es.eigenvalues()(0)) / es.eigenvalues().cwiseAbs().maxCoeff();
        worst_lambda = std::max(worst_lambda, lam);
        const double dev = (v.array() - v.mean()).abs().maxCoeff() / std::abs(v.mean());
        worst_dev = std::max(worst_dev, dev);
        const Eigen::VectorXd& z = spec.zero.u;
        worst_dev = std::max(worst_dev, (z.array() - z.mean()).abs().maxCoeff() / std::abs(z.mean()));
        // The second kernel direction would signal extra zero modes.
        o.require(es.eigenvalues()(1) > 1e-6 * es.eigenvalues().maxCoeff(), "kernel larger than constants");
    }
    o.require(worst_lambda <= 1e-9, fmt("|lambda_0| rel %.3g", worst_lambda));
    o.require(worst_dev <= 1e-7, fmt("constant deviation %.3g", worst_dev));
    o.detail = fmt("%zu runs, max |lambda_0|/max|lambda| %.2e, max deviation from constant %.2e",
                   admissible_cases().size(), worst_lambda, worst_dev) +
               (o.pass ? "" : " -- " + o.detail);
    return o;
}

struct CaseSpectrum {
    AssembledForms forms;
    Spectrum spectrum;
};

std::vector<CaseSpectrum>& computed_spectra() {
    static std::vector<CaseSpectrum> all = [] {
        std::vector<CaseSpectrum> out;
        for (const Case& c : admissible_cases()) {
            AssembledForms f = forms_for(c, 64, 32);
            Spectrum s = solve_spectrum(f, 4, 4);
            out.push_back({std::move(f), std::move(s)});
        }
        return out;
    }();
    return all;
}

Outcome two_sided() {
    Outcome o;
    std::size_t min_pos = 1000, min_neg = 1000;
    for (const CaseSpectrum& cs : computed_spectra()) {
        const Spectrum& s = cs.spectrum;
        min_pos = std::min(min_pos, s.positives.size());
        min_neg = std::min(min_neg, s.negatives.size());
        for (const auto& e : s.positives) o.require(e.lambda > 0.0, "nonpositive eigenvalue on the positive side");
        for (const auto& e : s.negatives) o.require(e.lambda < 0.0, "nonnegative eigenvalue on the negative side");
        if (!s.positives.empty() && !s.negatives.empty()) {
            o.require(s.negatives.front().lambda < s.zero.lambda && s.zero.lambda < s.positives.front().lambda,
                      "lambda_0 not strictly between the two sequences");
        }
    }
    o.require(min_pos >= 3 && min_neg >= 3, fmt("counts %zu/%zu", min_pos, min_neg));
    o.detail = fmt("%zu runs, at least %zu positive and %zu negative, strictly separated",
                   computed_spectra().size(), min_pos, min_neg) +
               (o.pass ? "" : " -- " + o.detail);
    return o;
}

// Brute-force oracle: QZ on the unreduced (B, W) pencil over active DOFs.
double qz_first_positive(const AssembledForms& f) {
    const Eigen::MatrixXd B = active_block(f, f.B);
    const Eigen::MatrixXd W = active_block(f, f.W);
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(B, W, false);
    double best = kInfinity;
    const double scale = B.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < ges.betas().size(); ++i) {
        const double beta = ges.betas()(i);
        if (std::abs(beta) < 1e-12 * W.cwiseAbs().maxCoeff()) continue;
        const double lambda = ges.alphas()(i).real() / beta;
        if (lambda > 1e-8 * scale) best = std::min(best, lambda);
    }
    return best;
}

Outcome first_eigen() {
    Outcome o;
    std::string detail;
    for (const OperatorParams& op : {OperatorParams{1.0, 1.0, 0.5, 1}, OperatorParams{0.0, 1.0, 0.5, 1},
                                     OperatorParams{1.0, 0.0, 0.5, 1}}) {
        const Case c{op, kSignChanging};
        const AssembledForms coarse = forms_for(c, 64, 16);
        const AssembledForms fine = forms_for(c, 128, 32);
        const Spectrum sc = solve_spectrum(coarse, 3, 1);
        const Spectrum sf = solve_spectrum(fine, 3, 1);
        const FirstEigenStructure st = first_eigen_structure(sc, &sf);
        const double l1 = sc.positives.front().lambda;
        const double oracle = qz_first_positive(forms_for(c, 256, 64));
        const double rel = std::abs(l1 - oracle) / oracle;
        o.require(l1 > 0.0, "lambda_1 <= 0");
        o.require(st.positive_side, "principal side is not positive");
        o.require(st.simple && st.gap > 1e-6, fmt("gap %.3g", st.gap));
        o.require(st.signed_ && st.min_over_max >= -1e-8, fmt("min/max %.3g", st.min_over_max));
        o.require(rel <= 5e-3, fmt("oracle rel diff %.3g", rel));
        detail += fmt("%s(a=%g,b=%g) l1=%.5g gap=%.3g min/max=%.3g vs 4x QZ %.2e",
                      detail.empty() ? "" : "; ", op.alpha, op.beta, l1, st.gap, st.min_over_max, rel);
    }
    o.detail = detail + (o.pass ? "" : " -- " + o.detail);
    return o;
}

Outcome min_characterization() {
    Outcome o;
    double worst = kInfinity;
    std::size_t total = 0;
    std::uint64_t stream = 100;
    for (const CaseSpectrum& cs : computed_spectra()) {
        const double l1 = cs.spectrum.positives.front().lambda;
        CounterRng rng(2024, stream++);
        std::size_t accepted = 0;
        for (int draw = 0; accepted < 1000 && draw < 4000; ++draw) {
            std::optional<Eigen::VectorXd> v;
            if (draw % 2 == 1) {
                // Near the minimizer, where the inequality is tight.
                const double eps = std::pow(10.0, rng.uniform(-4.0, 0.0));
                Eigen::VectorXd w = cs.spectrum.positives.front().u + eps * sample_in_v(cs.forms, rng);
                if (w.dot(cs.forms.W * w) > 0.0) v = std::move(w);
            } else {
                v = sample_in_v_signed(cs.forms, rng, 1);
            }
            if (!v) continue;
            ++accepted;
            worst = std::min(worst, rayleigh(cs.forms, *v) - (l1 - 1e-8));
        }
        o.require(accepted == 1000, fmt("only %zu admissible samples", accepted));
        total += accepted;
    }
    o.require(worst >= 0.0, fmt("violation by %.3g", -worst));
    o.detail = fmt("%zu samples over %zu runs, min(rayleigh - lambda_1 + 1e-8) = %.3g", total,
                   computed_spectra().size(), worst) +
               (o.pass ? "" : " -- " + o.detail);
    return o;
}

Outcome poincare() {
    Outcome o;
    double worst = -kInfinity;
    std::uint64_t stream = 200;
    for (const CaseSpectrum& cs : computed_spectra()) {
        const double C = poincare_constant(cs.forms);
        CounterRng rng(2024, stream++);
        for (int i = 0; i < 1000; ++i) {
            const Eigen::VectorXd v = i % 2 ? sample_in_v(cs.forms, rng) : smooth_sample_in_v(cs.forms, rng);
            worst = std::max(worst, v.dot(cs.forms.M * v) - C * seminorm_sq(cs.forms, v) - 1e-10);
        }
    }
    const AssembledForms classical = assemble({1.0, 0.0, 0.5, 1}, build_mesh(0.0, 1.0, 512, 1.0, 4),
                                              PiecewiseField::constant(0.0, 1.0, 1.0));
    const double C = poincare_constant(classical);
    const double ref = 2.0 / (kPi * kPi);
    const double rel = std::abs(C - ref) / ref;
    o.require(worst <= 0.0, fmt("sample excess %.3g", worst));
    o.require(rel < 0.01, fmt("classical C rel err %.3g", rel));
    o.detail = fmt("max(vMv - C[v]^2 - 1e-10) = %.3g over %zu x 1000 samples; classical C = %.8f (2/pi^2 rel err %.2e)",
                   worst, computed_spectra().size(), C, rel) +
               (o.pass ? "" : " -- " + o.detail);
    return o;
}

Report g_audit_report;
double g_audit_seconds = 0.0;

RunConfig audit_config() {
    RunConfig c;
    c.task = "audit";
    c.geometry = {0.0, 1.0, 64, 1.0, 16};
    c.op = {1.0, 1.0, 0.5, 1};
    c.weight = kSignChanging;
    c.seed = 42;
    c.audit_samples = 1000000;
    c.graph_samples = 10000;
    return c;
}

Outcome audits() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    g_audit_report = run(audit_config());
    g_audit_seconds = seconds_since(t0);
    std::string counts;
    for (const AuditCounter& a : g_audit_report.audits) {
        const std::uint64_t want = a.name == "decomposition" ? 10000 : 1000000;
        o.require(a.samples == want, a.name + " sample count");
        o.require(a.violations == 0, a.name + " violations");
        counts += fmt("%s%s %llu/%llu", counts.empty() ? "" : ", ", a.name.c_str(),
                      static_cast<unsigned long long>(a.violations), static_cast<unsigned long long>(a.samples));
    }
    o.require(g_audit_report.audits.size() == 4, "expected four audits");
    o.require(g_audit_seconds < 60.0, fmt("runtime %.1fs", g_audit_seconds));
    o.detail = counts + fmt(" violations, %.2fs", g_audit_seconds) + (o.pass ? "" : " -- " + o.detail);
    return o;
}

Outcome zero_flux() {
    Outcome o;
    const Mesh1D mesh = build_mesh(0.0, 1.0, 512, 1.0, 4);
    const AssembledForms f = assemble({1.0, 0.0, 0.5, 1}, mesh, kSignChanging);
    bool rejected = false;
    try {
        solve_source(f, PiecewiseField::constant(0.0, 1.0, 1.0, FieldRole::Source));
    } catch (const Error& e) {
        rejected = e.kind() == ErrorKind::ZeroFluxViolation;
    }
    o.require(rejected, "f = 1 was not rejected");

    const PiecewiseField src{{0.0, 0.5, 1.0}, {1.0, -1.0}, FieldRole::Source};
    const Eigen::VectorXd u = solve_source(f, src);
    // -u'' = f with homogeneous Neumann ends, zero mean.
    auto exact = [](double x) {
        return x < 0.5 ? -x * x / 2.0 + 0.125 : x * x / 2.0 - x + 0.375;
    };
    double err = 0.0, ref = 0.0;
    for (std::size_t i = mesh.left_boundary_node(); i <= mesh.right_boundary_node(); ++i) {
        err = std::max(err, std::abs(u(static_cast<Eigen::Index>(i)) - exact(mesh.node(i))));
        ref = std::max(ref, std::abs(exact(mesh.node(i))));
    }
    const double rel = err / ref;
    o.require(rel < 1e-3, fmt("oracle rel err %.3g", rel));

    const Eigen::VectorXd F = load_vector(mesh, src);
    double worst_gauge = 0.0;
    for (double shift : {-3.0, 0.5, 10.0}) {
        const Eigen::VectorXd v = u + shift * Eigen::VectorXd::Ones(u.size());
        worst_gauge = std::max(worst_gauge, (f.B * v - F).norm() / (f.B.norm() * v.norm() + F.norm()));
    }
    o.require(worst_gauge <= 1e-10, fmt("gauge backward error %.3g", worst_gauge));
    o.detail = fmt("f=1 rejected, oracle rel err %.2e, shifted backward error %.2e", rel, worst_gauge) +
               (o.pass ? "" : " -- " + o.detail);
    return o;
}

Outcome neumann_residual() {
    Outcome o;
    const Case c{{0.0, 1.0, 0.5, 1}, kSignChanging};
    std::vector<double> maxima;
    std::string seq;
    std::string fixed;
    for (int n : {16, 32, 64, 128}) {
        const AssembledForms f = forms_for(c, n, n);
        const Spectrum s = solve_spectrum(f, 2, 2);
        const NeumannResiduals r = neumann_residuals(f, s.positives.front().u);
        const double m = r.max_abs_ns();
        maxima.push_back(m);
        seq += fmt("%s%.3g", seq.empty() ? "" : ", ", m);
        // Diagnostic only: the same statistic restricted to the collar nodes of
        // the coarsest mesh, minus the two truncation endpoints.
        double fixed_max = 0.0;
        for (const CollarValue& cv : *r.ns_profile) {
            const bool coarse_node = std::abs(cv.x * 16.0 - std::round(cv.x * 16.0)) < 1e-9;
            const bool truncation_edge = cv.x == -1.0 || cv.x == 2.0;
            if (coarse_node && !truncation_edge) fixed_max = std::max(fixed_max, std::abs(cv.value));
        }
        fixed += fmt("%s%.3g", fixed.empty() ? "" : ", ", fixed_max);
        const NeumannResiduals one = neumann_residuals(f, Eigen::VectorXd::Ones(f.B.rows()));
        o.require(one.ns_profile && one.max_abs_ns() == 0.0, "N_s(1) != 0");
    }
    for (std::size_t i = 1; i < maxima.size(); ++i) {
        o.require(maxima[i] < maxima[i - 1], fmt("no decrease from n_in = %d to %d", 16 << (i - 1), 16 << i));
    }
    o.detail = "max collar |N_s u_1|, n_in = n_col = 16..128: " + seq + "; N_s(1) = 0" +
               "; [diagnostic] fixed interior collar points: " + fixed + (o.pass ? "" : " -- " + o.detail);
    return o;
}

Outcome degiorgi() {
    Outcome o;
    std::size_t count = 0;
    int max_halvings = 0;
    const PiecewiseField zero = PiecewiseField::constant(0.0, 1.0, 0.0, FieldRole::Source);
    for (const CaseSpectrum& cs : computed_spectra()) {
        std::vector<const EigenPair*> pairs{&cs.spectrum.zero};
        for (const auto& e : cs.spectrum.positives) pairs.push_back(&e);
        for (const auto& e : cs.spectrum.negatives) pairs.push_back(&e);
        for (const EigenPair* e : pairs) {
            const DeGiorgiReport r = degiorgi_search(cs.forms, e->u, zero, 4.0, 20);
            ++count;
            max_halvings = std::max(max_halvings, r.halvings);
            o.require(r.converged && r.halvings <= 20, "ladder did not converge");
            o.require(r.sup_u_plus <= r.kappa + r.K_level + 1e-9, fmt("sup u+ %.6g > bound", r.sup_u_plus));
            for (std::size_t l = 1; l < r.ladder.size(); ++l) {
                const double step = r.ladder[l].k - r.ladder[l - 1].k;
                const double want = std::ldexp(r.K_level, -r.ladder[l].ell);
                // k_l is formed as kappa + K (1 - 2^-l); the subtraction is exact up to rounding of the sum.
                o.require(std::abs(step - want) <= 4.0 * std::numeric_limits<double>::epsilon() * r.ladder[l].k,
                          "ladder identity");
                o.require(r.ladder[l].phi <= r.ladder[l - 1].phi, "phi not monotone");
            }
        }
    }
    o.detail = fmt("%zu eigenfunctions certified, at most %d halvings", count, max_halvings) +
               (o.pass ? "" : " -- " + o.detail);
    return o;
}

Outcome determinism() {
    Outcome o;
    const std::string first = report_to_json(g_audit_report);
    const std::string second = report_to_json(run(audit_config()));
    o.require(!g_audit_report.audits.empty(), "no first run");
    o.require(first == second, "reports differ");
    o.detail = fmt("two audit runs with seed 42, %zu-byte reports identical", first.size());
    if (!o.pass) o.detail = "reports differ";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"classical-limit spectrum", classical_limit},
        {"zero eigenvalue and constant kernel", zero_eigenvalue},
        {"two-sided spectrum", two_sided},
        {"first eigenpair structure", first_eigen},
        {"min-characterization", min_characterization},
        {"Poincare inequality", poincare},
        {"scalar inequality audits", audits},
        {"zero-flux source problem", zero_flux},
        {"Neumann residuals", neumann_residual},
        {"De Giorgi certificate", degiorgi},
        {"determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", index - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
