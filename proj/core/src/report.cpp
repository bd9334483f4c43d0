#include "mixneu/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mixneu/error.hpp"
#include "mixneu/spectral.hpp"

namespace mixneu {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
    if (!j.is_object()) {
        throw Error(ErrorKind::Config, std::string(where) + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw Error(ErrorKind::Config,
                        "unknown key '" + item.key() + "' in " + std::string(where));
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json q_to_json(double q) { return std::isinf(q) ? json("inf") : json(q); }

double q_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInfinity;
        throw Error(ErrorKind::Config, "q must be a number or \"inf\"");
    }
    return j.get<double>();
}

json field_to_json(const PiecewiseField& f) {
    return json{{"breaks", f.breaks}, {"values", f.values}};
}

PiecewiseField field_from_json(const json& j, FieldRole role, std::string_view where) {
    reject_unknown(j, {"breaks", "values"}, where);
    PiecewiseField f;
    f.breaks = j.at("breaks").get<std::vector<double>>();
    f.values = j.at("values").get<std::vector<double>>();
    f.role = role;
    return f;
}

json config_json(const RunConfig& c) {
    json j;
    j["task"] = c.task;
    j["geometry"] = {{"a", c.geometry.a},
                     {"b", c.geometry.b},
                     {"n_in", c.geometry.n_in},
                     {"R", c.geometry.R},
                     {"n_col", c.geometry.n_col}};
    j["operator"] = {{"alpha", c.op.alpha}, {"beta", c.op.beta}, {"s", c.op.s}};
    j["weight"] = field_to_json(c.weight);
    if (c.coefficient) j["coefficient"] = field_to_json(*c.coefficient);
    if (c.source) j["source"] = field_to_json(*c.source);
    j["q"] = q_to_json(c.q);
    j["eigencounts"] = {{"k_pos", c.k_pos}, {"k_neg", c.k_neg}};
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["diagnostic"] = c.diagnostic;
    j["quadrature"] = {{"order", c.quad_order}, {"split_depth", c.split_depth}};
    j["convergence"] = {{"levels", c.levels}};
    j["audit"] = {{"samples", c.audit_samples},
                  {"graph_samples", c.graph_samples},
                  {"v_samples", c.v_samples}};
    return j;
}

RunConfig config_from_json(const json& j) {
    reject_unknown(j,
                   {"task", "geometry", "operator", "weight", "coefficient", "source", "q",
                    "eigencounts", "seed", "output", "diagnostic", "quadrature", "convergence",
                    "audit"},
                   "config");
    RunConfig c;
    c.task = get_or<std::string>(j, "task", c.task);
    if (std::find(std::begin(kTasks), std::end(kTasks), c.task) == std::end(kTasks)) {
        throw Error(ErrorKind::Config, "unknown task '" + c.task + "'");
    }
    const json& g = j.at("geometry");
    reject_unknown(g, {"a", "b", "n_in", "R", "n_col"}, "geometry");
    c.geometry = {g.at("a").get<double>(), g.at("b").get<double>(), g.at("n_in").get<int>(),
                  g.at("R").get<double>(), g.at("n_col").get<int>()};
    const json& op = j.at("operator");
    reject_unknown(op, {"alpha", "beta", "s"}, "operator");
    c.op = {op.at("alpha").get<double>(), op.at("beta").get<double>(), op.at("s").get<double>(), 1};
    c.weight = field_from_json(j.at("weight"), FieldRole::Weight, "weight");
    if (j.contains("coefficient")) {
        c.coefficient = field_from_json(j.at("coefficient"), FieldRole::Coefficient, "coefficient");
    }
    if (j.contains("source")) c.source = field_from_json(j.at("source"), FieldRole::Source, "source");
    if (j.contains("q")) c.q = q_from_json(j.at("q"));
    if (j.contains("eigencounts")) {
        const json& e = j.at("eigencounts");
        reject_unknown(e, {"k_pos", "k_neg"}, "eigencounts");
        c.k_pos = get_or(e, "k_pos", c.k_pos);
        c.k_neg = get_or(e, "k_neg", c.k_neg);
    }
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.output = get_or<std::string>(j, "output", c.output);
    c.diagnostic = get_or(j, "diagnostic", c.diagnostic);
    if (j.contains("quadrature")) {
        const json& qd = j.at("quadrature");
        reject_unknown(qd, {"order", "split_depth"}, "quadrature");
        c.quad_order = get_or(qd, "order", c.quad_order);
        c.split_depth = get_or(qd, "split_depth", c.split_depth);
    }
    if (j.contains("convergence")) {
        const json& cv = j.at("convergence");
        reject_unknown(cv, {"levels"}, "convergence");
        c.levels = get_or(cv, "levels", c.levels);
    }
    if (j.contains("audit")) {
        const json& a = j.at("audit");
        reject_unknown(a, {"samples", "graph_samples", "v_samples"}, "audit");
        c.audit_samples = get_or(a, "samples", c.audit_samples);
        c.graph_samples = get_or(a, "graph_samples", c.graph_samples);
        c.v_samples = get_or(a, "v_samples", c.v_samples);
    }
    return c;
}

void validate_config(const RunConfig& c) {
    const Geometry& g = c.geometry;
    (void)build_mesh(g.a, g.b, g.n_in, g.R, g.n_col);
    validate(c.op);
    validate(c.weight, g.a, g.b);
    if (c.coefficient) validate(*c.coefficient, g.a, g.b);
    if (c.source) validate(*c.source, g.a, g.b);
    const double q_bar = critical_exponent(c.op);
    if (!(c.q > q_bar)) {
        std::ostringstream msg;
        msg << "q = " << c.q << " must exceed the critical exponent " << q_bar;
        throw Error(ErrorKind::InadmissibleIntegrability, msg.str());
    }
    if (c.k_pos < 0 || c.k_neg < 0) throw Error(ErrorKind::Config, "eigencounts must be >= 0");
    if (c.quad_order < 2 || c.split_depth < 0) {
        throw Error(ErrorKind::Config, "quadrature order must be >= 2 and split_depth >= 0");
    }
    if (c.task == "solve-source" && !c.source) {
        throw Error(ErrorKind::Config, "task solve-source needs a 'source' field");
    }
    if (c.task == "convergence") {
        if (c.levels.size() < 2) throw Error(ErrorKind::Config, "convergence needs >= 2 levels");
        for (int n : c.levels) {
            if (n < 2) throw Error(ErrorKind::Config, "convergence levels must be >= 2");
        }
    }
}

}  // namespace

void to_json(json& j, const WeightDiagnostics& w) {
    j = {{"integral", w.integral}, {"plus_mass", w.plus_mass}, {"minus_mass", w.minus_mass}};
}
void from_json(const json& j, WeightDiagnostics& w) {
    w.integral = j.at("integral").get<double>();
    w.plus_mass = j.at("plus_mass").get<double>();
    w.minus_mass = j.at("minus_mass").get<double>();
}
void to_json(json& j, const SpectrumRow& r) {
    j = {{"label", r.label},         {"index", r.index},
         {"lambda", r.lambda},       {"lambda_seminorm", r.lambda_seminorm},
         {"normalization", r.normalization}, {"residual", r.residual}};
}
void from_json(const json& j, SpectrumRow& r) {
    r.label = j.at("label").get<std::string>();
    r.index = j.at("index").get<int>();
    r.lambda = j.at("lambda").get<double>();
    r.lambda_seminorm = j.at("lambda_seminorm").get<double>();
    r.normalization = j.at("normalization").get<double>();
    r.residual = j.at("residual").get<double>();
}
void to_json(json& j, const ResidualRow& r) {
    j = {{"label", r.label}, {"node", r.node}, {"x", r.x}, {"ns", r.ns}};
}
void from_json(const json& j, ResidualRow& r) {
    r.label = j.at("label").get<std::string>();
    r.node = j.at("node").get<std::uint64_t>();
    r.x = j.at("x").get<double>();
    r.ns = j.at("ns").get<double>();
}
void to_json(json& j, const NormalDerivRow& r) {
    j = {{"label", r.label}, {"left", r.left}, {"right", r.right}};
}
void from_json(const json& j, NormalDerivRow& r) {
    r.label = j.at("label").get<std::string>();
    r.left = j.at("left").get<double>();
    r.right = j.at("right").get<double>();
}
void to_json(json& j, const LadderStep& s) {
    j = {{"ell", s.ell}, {"k", s.k}, {"phi", s.phi}, {"measure", s.measure}};
}
void from_json(const json& j, LadderStep& s) {
    s.ell = j.at("ell").get<int>();
    s.k = j.at("k").get<double>();
    s.phi = j.at("phi").get<double>();
    s.measure = j.at("measure").get<double>();
}
void to_json(json& j, const DeGiorgiReport& r) {
    j = {{"kappa", r.kappa},         {"K_level", r.K_level},   {"c_star", r.c_star},
         {"ladder", r.ladder},       {"converged", r.converged}, {"bound", r.bound},
         {"C_emp", r.C_emp},         {"sup_u_plus", r.sup_u_plus}, {"u_plus_l2", r.u_plus_l2},
         {"f_norm", r.f_norm},       {"in_v", r.in_v},         {"halvings", r.halvings}};
}
void from_json(const json& j, DeGiorgiReport& r) {
    r.kappa = j.at("kappa").get<double>();
    r.K_level = j.at("K_level").get<double>();
    r.c_star = j.at("c_star").get<double>();
    r.ladder = j.at("ladder").get<std::vector<LadderStep>>();
    r.converged = j.at("converged").get<bool>();
    r.bound = j.at("bound").get<double>();
    r.C_emp = j.at("C_emp").get<double>();
    r.sup_u_plus = j.at("sup_u_plus").get<double>();
    r.u_plus_l2 = j.at("u_plus_l2").get<double>();
    r.f_norm = j.at("f_norm").get<double>();
    r.in_v = j.at("in_v").get<bool>();
    r.halvings = j.at("halvings").get<int>();
}
void to_json(json& j, const DeGiorgiEntry& e) { j = {{"label", e.label}, {"report", e.report}}; }
void from_json(const json& j, DeGiorgiEntry& e) {
    e.label = j.at("label").get<std::string>();
    e.report = j.at("report").get<DeGiorgiReport>();
}
void to_json(json& j, const AuditCounter& a) {
    j = {{"name", a.name}, {"samples", a.samples}, {"violations", a.violations}};
}
void from_json(const json& j, AuditCounter& a) {
    a.name = j.at("name").get<std::string>();
    a.samples = j.at("samples").get<std::uint64_t>();
    a.violations = j.at("violations").get<std::uint64_t>();
}
void to_json(json& j, const ConvergenceRow& r) {
    j = {{"n_in", r.n_in}, {"h", r.h}, {"lambdas", r.lambdas}, {"errors", r.errors}};
}
void from_json(const json& j, ConvergenceRow& r) {
    r.n_in = j.at("n_in").get<int>();
    r.h = j.at("h").get<double>();
    r.lambdas = j.at("lambdas").get<std::vector<double>>();
    r.errors = j.at("errors").get<std::vector<double>>();
}
void to_json(json& j, const Check& c) {
    j = {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}};
}
void from_json(const json& j, Check& c) {
    c.name = j.at("name").get<std::string>();
    c.passed = j.at("passed").get<bool>();
    c.value = j.at("value").get<double>();
    c.threshold = j.at("threshold").get<double>();
}

RunConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    try {
        c = config_from_json(j);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("malformed config: ") + e.what());
    }
    validate_config(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& config) { return config_json(config).dump(2); }

std::string report_to_json(const Report& r) {
    json j;
    j["schema"] = "mixneu-report/1";
    j["config"] = config_json(r.config);
    j["weight"] = r.weight ? json(*r.weight) : json(nullptr);
    j["spectrum"] = r.spectrum;
    j["nodes"] = r.nodes;
    j["eigen_labels"] = r.eigen_labels;
    j["eigenfunctions"] = r.eigenfunctions;
    j["source_solution"] = r.source_solution ? json(*r.source_solution) : json(nullptr);
    j["residuals"] = r.residuals;
    j["normal_derivs"] = r.normal_derivs;
    j["degiorgi"] = r.degiorgi;
    j["audits"] = r.audits;
    j["convergence_reference"] = r.convergence_reference;
    j["convergence"] = r.convergence;
    j["observed_order"] = r.observed_order;
    j["checks"] = r.checks;
    j["warnings"] = r.warnings;
    return j.dump(2);
}

Report report_from_json(std::string_view json_text) {
    try {
        const json j = json::parse(json_text);
        if (j.at("schema").get<std::string>() != "mixneu-report/1") {
            throw Error(ErrorKind::Config, "unsupported report schema");
        }
        Report r;
        r.config = config_from_json(j.at("config"));
        if (!j.at("weight").is_null()) r.weight = j.at("weight").get<WeightDiagnostics>();
        r.spectrum = j.at("spectrum").get<std::vector<SpectrumRow>>();
        r.nodes = j.at("nodes").get<std::vector<double>>();
        r.eigen_labels = j.at("eigen_labels").get<std::vector<std::string>>();
        r.eigenfunctions = j.at("eigenfunctions").get<std::vector<std::vector<double>>>();
        if (!j.at("source_solution").is_null()) {
            r.source_solution = j.at("source_solution").get<std::vector<double>>();
        }
        r.residuals = j.at("residuals").get<std::vector<ResidualRow>>();
        r.normal_derivs = j.at("normal_derivs").get<std::vector<NormalDerivRow>>();
        r.degiorgi = j.at("degiorgi").get<std::vector<DeGiorgiEntry>>();
        r.audits = j.at("audits").get<std::vector<AuditCounter>>();
        r.convergence_reference = j.at("convergence_reference").get<std::string>();
        r.convergence = j.at("convergence").get<std::vector<ConvergenceRow>>();
        r.observed_order = j.at("observed_order").get<std::vector<double>>();
        r.checks = j.at("checks").get<std::vector<Check>>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("malformed report: ") + e.what());
    }
}

bool Report::all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

// ---------------------------------------------------------------------------
// Tasks

namespace {

std::string pair_label(int index) { return "lambda_" + std::to_string(index); }

struct Problem {
    Mesh1D mesh;
    AssembledForms forms;
};

Problem make_problem(const RunConfig& c, int n_in, int n_col) {
    Mesh1D mesh = build_mesh(c.geometry.a, c.geometry.b, n_in, c.geometry.R, n_col);
    AssembledForms forms =
        assemble(c.op, mesh, c.weight, QuadratureRule(c.quad_order, c.split_depth));
    return {mesh, std::move(forms)};
}

Problem make_problem(const RunConfig& c) {
    return make_problem(c, c.geometry.n_in, c.geometry.n_col);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

PiecewiseField zero_source(const Mesh1D& mesh) {
    return PiecewiseField::constant(mesh.a(), mesh.b(), 0.0, FieldRole::Source);
}

void add_check(Report& r, std::string name, bool passed, double value, double threshold) {
    r.checks.push_back({std::move(name), passed, value, threshold});
}

void add_vector_diagnostics(Report& r, const AssembledForms& forms, const std::string& label,
                            const Eigen::VectorXd& u, const PiecewiseField& f, double q) {
    const NeumannResiduals res = neumann_residuals(forms, u);
    if (res.ns_profile) {
        for (const CollarValue& cv : *res.ns_profile) {
            r.residuals.push_back({label, cv.node, cv.x, cv.value});
        }
    }
    if (res.normal_deriv) {
        r.normal_derivs.push_back({label, res.normal_deriv->first, res.normal_deriv->second});
    }
    if (std::isfinite(q)) r.degiorgi.push_back({label, degiorgi_search(forms, u, f, q)});
}

void record_pair(Report& r, const AssembledForms& forms, const EigenPair& pair, int index,
                 double q) {
    const std::string label = pair_label(index);
    r.spectrum.push_back(
        {label, index, pair.lambda, 0.5 * pair.lambda, pair.normalization, pair.residual});
    r.eigen_labels.push_back(label);
    r.eigenfunctions.push_back(to_std(pair.u));
    add_vector_diagnostics(r, forms, label, pair.u, zero_source(forms.mesh), q);
}

void eigen_section(Report& r, const AssembledForms& forms, const Spectrum& spec) {
    const RunConfig& c = r.config;
    for (std::size_t k = spec.negatives.size(); k-- > 0;) {
        record_pair(r, forms, spec.negatives[k], -static_cast<int>(k) - 1, c.q);
    }
    record_pair(r, forms, spec.zero, 0, c.q);
    for (std::size_t k = 0; k < spec.positives.size(); ++k) {
        record_pair(r, forms, spec.positives[k], static_cast<int>(k) + 1, c.q);
    }
    for (const std::string& w : spec.warnings) r.warnings.push_back(w);
    if (!std::isfinite(c.q)) {
        r.warnings.emplace_back("q = inf: L-infinity ladder skipped (needs finite q)");
    }

    double max_abs = 0.0;
    double max_res = 0.0;
    double max_norm_err = 0.0;
    for (const auto* side : {&spec.negatives, &spec.positives}) {
        for (const EigenPair& p : *side) {
            max_abs = std::max(max_abs, std::abs(p.lambda));
            max_res = std::max(max_res, p.residual);
            max_norm_err = std::max(max_norm_err, std::abs(p.normalization - (p.lambda > 0 ? 1.0 : -1.0)));
        }
    }
    const double zero_rel = max_abs > 0 ? std::abs(spec.zero.lambda) / max_abs : std::abs(spec.zero.lambda);
    add_check(r, "lambda0_zero", zero_rel <= 1e-9, zero_rel, 1e-9);
    add_check(r, "weak_residual", max_res <= 1e-8, max_res, 1e-8);
    add_check(r, "normalization", max_norm_err <= 1e-10, max_norm_err, 1e-10);
    const bool separated =
        std::all_of(spec.negatives.begin(), spec.negatives.end(), [](const EigenPair& p) { return p.lambda < 0; }) &&
        std::all_of(spec.positives.begin(), spec.positives.end(), [](const EigenPair& p) { return p.lambda > 0; });
    add_check(r, "sign_separation", separated, 0.0, 0.0);
    if (!r.degiorgi.empty()) {
        int certified = 0;
        for (const DeGiorgiEntry& e : r.degiorgi) certified += e.report.certified() ? 1 : 0;
        add_check(r, "degiorgi_certified", certified == static_cast<int>(r.degiorgi.size()),
                  certified, static_cast<double>(r.degiorgi.size()));
    }
}

void run_audits(Report& r, const RunConfig& c) {
    r.audits.push_back(audit_mediant(c.audit_samples, c.seed));
    r.audits.push_back(audit_truncation(c.audit_samples, c.seed));
    r.audits.push_back(audit_product_bound(c.audit_samples, c.seed));
    const Mesh1D gmesh = build_mesh(c.geometry.a, c.geometry.b, 8, c.geometry.R, 4);
    OperatorParams gp = c.op;
    if (gp.beta == 0.0) gp.beta = 1.0;  // the difference form needs a nonlocal part
    r.audits.push_back(audit_decomposition(graph_form(gp, gmesh), c.graph_samples, c.seed));
    for (const AuditCounter& a : r.audits) {
        add_check(r, "audit_" + a.name, a.violations == 0, static_cast<double>(a.violations), 0.0);
    }
}

void run_verify(Report& r, const AssembledForms& forms, const Spectrum& spec) {
    const RunConfig& c = r.config;
    const bool pos_side = spec.weight_integral < 0;
    const auto& principal = pos_side ? spec.positives : spec.negatives;
    if (principal.size() >= 2) {
        const FirstEigenStructure st = first_eigen_structure(spec);
        add_check(r, "first_eigen_simple", st.simple, st.gap, 1e-6);
        add_check(r, "first_eigen_signed", st.signed_, st.min_over_max, -1e-8);
    } else {
        r.warnings.emplace_back("first eigenfunction structure skipped: fewer than two eigenvalues on the principal side");
    }

    // Min-characterization on each side, over random v in V of that sign.
    const std::uint64_t n = c.v_samples;
    const auto min_char = [&](int sign, const std::vector<EigenPair>& side, std::uint64_t stream,
                              const char* name) {
        if (side.empty()) return;
        CounterRng rng(c.seed, stream);
        double worst = kInfinity;
        std::uint64_t drawn = 0;
        for (; drawn < n; ++drawn) {
            // Odd draws perturb the first eigenfunction to probe near the minimum.
            std::optional<Eigen::VectorXd> v;
            if (drawn % 2 == 1) {
                const double eps = std::pow(10.0, rng.uniform(-4.0, 0.0));
                Eigen::VectorXd w = side.front().u + eps * sample_in_v(forms, rng);
                if (sign * w.dot(forms.W * w) > 0.0) v = std::move(w);
            }
            if (!v) v = sample_in_v_signed(forms, rng, sign);
            if (!v) break;
            worst = std::min(worst, sign * (rayleigh(forms, *v) - side.front().lambda));
        }
        if (drawn < n) {
            r.warnings.push_back(std::string(name) + ": sampler found only " + std::to_string(drawn) +
                                 " admissible directions");
        }
        if (drawn > 0) add_check(r, name, worst >= -1e-8, worst, -1e-8);
    };
    min_char(1, spec.positives, 10, "min_characterization_positive");
    min_char(-1, spec.negatives, 13, "min_characterization_negative");

    const double C = poincare_constant(forms);
    double worst = -kInfinity;
    CounterRng prng(c.seed, 11);
    for (std::uint64_t i = 0; i < n; ++i) {
        const Eigen::VectorXd v = sample_in_v(forms, prng);
        worst = std::max(worst, v.dot(forms.M * v) - C * seminorm_sq(forms, v));
    }
    add_check(r, "poincare_constant", C > 0 && std::isfinite(C), C, 0.0);
    add_check(r, "poincare_samples", worst <= 1e-10, worst, 1e-10);

    if (std::isfinite(c.q)) {
        CounterRng srng(c.seed, 12);
        double max_ratio = 0.0;
        bool failure = false;
        for (std::uint64_t i = 0; i < n; ++i) {
            const SobolevCheck sc = sobolev_check(forms, c.q, smooth_sample_in_v(forms, srng));
            max_ratio = std::max(max_ratio, sc.ratio);
            failure = failure || sc.projection_failure;
        }
        add_check(r, "sobolev_ratio_bounded", !failure && std::isfinite(max_ratio), max_ratio, 0.0);
    }

    // W-orthogonality of the computed nonzero pairs.
    std::vector<const EigenPair*> pairs;
    for (const auto& p : spec.negatives) pairs.push_back(&p);
    for (const auto& p : spec.positives) pairs.push_back(&p);
    const double wn = forms.W.norm();
    double worst_orth = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            const double d = std::abs(pairs[i]->u.dot(forms.W * pairs[j]->u)) /
                             (pairs[i]->u.norm() * pairs[j]->u.norm() * wn);
            worst_orth = std::max(worst_orth, d);
        }
    }
    add_check(r, "w_orthogonality", worst_orth <= 1e-7, worst_orth, 1e-7);
    run_audits(r, c);
}

// Least-squares slope of log(err) against log(h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
    const std::size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void run_convergence(Report& r) {
    const RunConfig& c = r.config;
    const bool constant_weight = c.weight.pieces() == 1 ||
                                 std::all_of(c.weight.values.begin(), c.weight.values.end(),
                                             [&](double v) { return v == c.weight.values.front(); });
    const bool closed_form = c.op.beta == 0.0 && constant_weight;
    r.convergence_reference = closed_form ? "closed-form" : "richardson";
    const double L = c.geometry.b - c.geometry.a;
    const double m0 = c.weight.values.front();

    for (int n : c.levels) {
        const int n_col = std::max(1, static_cast<int>(std::lround(
                                          static_cast<double>(c.geometry.n_col) * n / c.geometry.n_in)));
        const Problem p = make_problem(c, n, n_col);
        const Spectrum spec = solve_spectrum(p.forms, c.k_pos, c.k_neg, {c.diagnostic});
        const auto& side = spec.positives.empty() ? spec.negatives : spec.positives;
        ConvergenceRow row{n, p.mesh.h(), {}, {}};
        for (std::size_t k = 0; k < side.size(); ++k) {
            row.lambdas.push_back(side[k].lambda);
            if (closed_form) {
                const double kk = static_cast<double>(k + 1);
                const double exact = c.op.alpha * kk * kk * std::numbers::pi * std::numbers::pi / (m0 * L * L);
                row.errors.push_back(std::abs(side[k].lambda - exact) / std::abs(exact));
            }
        }
        r.convergence.push_back(std::move(row));
    }

    std::size_t count = r.convergence.front().lambdas.size();
    for (const ConvergenceRow& row : r.convergence) count = std::min(count, row.lambdas.size());
    for (std::size_t k = 0; k < count; ++k) {
        if (closed_form) {
            std::vector<double> h, err;
            for (const ConvergenceRow& row : r.convergence) {
                h.push_back(row.h);
                err.push_back(row.errors[k]);
            }
            r.observed_order.push_back(fitted_order(h, err));
        } else if (r.convergence.size() >= 3) {
            const std::size_t m = r.convergence.size();
            const double l1 = r.convergence[m - 3].lambdas[k];
            const double l2 = r.convergence[m - 2].lambdas[k];
            const double l3 = r.convergence[m - 1].lambdas[k];
            const double ratio = (r.convergence[m - 3].h / r.convergence[m - 2].h);
            r.observed_order.push_back(std::log(std::abs((l1 - l2) / (l2 - l3))) / std::log(ratio));
        }
    }
    if (!r.observed_order.empty()) {
        const double p = r.observed_order.front();
        add_check(r, "observed_order_lambda1", std::abs(p - 2.0) <= 0.3, p, 2.0);
    }
}

}  // namespace

Report run(const RunConfig& config) {
    validate_config(config);
    Report r;
    r.config = config;
    const RunConfig& c = r.config;

    if (c.task == "audit") {
        run_audits(r, c);
        return r;
    }
    if (c.task == "convergence") {
        run_convergence(r);
        return r;
    }

    const Problem p = make_problem(c);
    r.weight = p.forms.weight;
    r.nodes.assign(p.mesh.nodes().begin(), p.mesh.nodes().end());
    if (c.coefficient && std::isfinite(c.q)) {
        const double cn = lq_norm(*c.coefficient, c.q);
        add_check(r, "coefficient_lq_finite", std::isfinite(cn), cn, 0.0);
    }

    if (c.task == "solve-source") {
        const Eigen::VectorXd u = solve_source(p.forms, *c.source);
        r.source_solution = to_std(u);
        const Eigen::VectorXd F = load_vector(p.mesh, *c.source);
        const double res = F.norm() > 0 ? (p.forms.B * u - F).norm() / F.norm() : 0.0;
        add_check(r, "source_residual", res <= 1e-10, res, 1e-10);
        const double gauge = std::abs(p.forms.ones_mass.dot(u));
        add_check(r, "source_gauge", gauge <= 1e-10, gauge, 1e-10);
        add_vector_diagnostics(r, p.forms, "source", u, *c.source, c.q);
        return r;
    }

    const Spectrum spec = solve_spectrum(p.forms, c.k_pos, c.k_neg, {c.diagnostic});
    eigen_section(r, p.forms, spec);
    if (c.task == "verify") run_verify(r, p.forms, spec);
    return r;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.precision(17);
    return out;
}

}  // namespace

std::vector<std::filesystem::path> emit(const Report& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;

    {
        const auto path = dir / "spectrum.csv";
        auto out = open_out(path);
        out << "label,index,lambda,lambda_seminorm,normalization,residual\n";
        for (const SpectrumRow& row : r.spectrum) {
            out << row.label << ',' << row.index << ',' << row.lambda << ',' << row.lambda_seminorm
                << ',' << row.normalization << ',' << row.residual << '\n';
        }
        written.push_back(path);
    }
    {
        const auto path = dir / "eigenfunctions.csv";
        auto out = open_out(path);
        out << "node,x";
        for (const std::string& label : r.eigen_labels) out << ',' << label;
        out << '\n';
        if (!r.eigen_labels.empty()) {
            for (std::size_t i = 0; i < r.nodes.size(); ++i) {
                out << i << ',' << r.nodes[i];
                for (const auto& values : r.eigenfunctions) out << ',' << values[i];
                out << '\n';
            }
        }
        written.push_back(path);
    }
    {
        const auto path = dir / "residuals.csv";
        auto out = open_out(path);
        out << "label,node,x,ns\n";
        for (const ResidualRow& row : r.residuals) {
            out << row.label << ',' << row.node << ',' << row.x << ',' << row.ns << '\n';
        }
        written.push_back(path);
    }
    {
        const auto path = dir / "degiorgi.csv";
        auto out = open_out(path);
        out << "label,ell,k,phi,measure\n";
        for (const DeGiorgiEntry& e : r.degiorgi) {
            for (const LadderStep& s : e.report.ladder) {
                out << e.label << ',' << s.ell << ',' << s.k << ',' << s.phi << ',' << s.measure << '\n';
            }
        }
        written.push_back(path);
    }
    if (r.source_solution) {
        const auto path = dir / "solution.csv";
        auto out = open_out(path);
        out << "node,x,u\n";
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            out << i << ',' << r.nodes[i] << ',' << (*r.source_solution)[i] << '\n';
        }
        written.push_back(path);
    }
    if (!r.convergence.empty()) {
        const auto path = dir / "convergence.csv";
        auto out = open_out(path);
        out << "n_in,h,index,lambda,rel_error\n";
        for (const ConvergenceRow& row : r.convergence) {
            for (std::size_t k = 0; k < row.lambdas.size(); ++k) {
                out << row.n_in << ',' << row.h << ',' << k + 1 << ',' << row.lambdas[k] << ',';
                if (k < row.errors.size()) out << row.errors[k];
                out << '\n';
            }
        }
        written.push_back(path);
    }
    {
        const auto path = dir / "report.json";
        auto out = open_out(path);
        out << report_to_json(r) << '\n';
        written.push_back(path);
    }
    return written;
}

}  // namespace mixneu
