#include "amlab/lab/experiment.hpp"

#include "amlab/arithmetic/predicates.hpp"
#include "amlab/cocycle/cocycle.hpp"
#include "amlab/denjoy/denjoy.hpp"
#include "amlab/errors.hpp"
#include "amlab/hamiltonian/hamiltonian.hpp"
#include "amlab/kernels/kernels.hpp"
#include "amlab/specialflow/specialflow.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace amlab::lab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr double kPi = std::numbers::pi;

const std::set<std::string>& experiments() {
    static const std::set<std::string> names{"one-hole-rigidity", "two-hole-weak-mixing",
                                             "half-cover-corollary", "am-pipeline"};
    return names;
}

ErrorCode code_from_string(const std::string& s) {
    static const std::map<std::string, ErrorCode> table{
        {"invalid-input", ErrorCode::kInvalidInput},
        {"insufficient-depth", ErrorCode::kInsufficientDepth},
        {"invalid-holes", ErrorCode::kInvalidHoles},
        {"invalid-mass", ErrorCode::kInvalidMass},
        {"unbalanced-jumps", ErrorCode::kUnbalancedJumps},
        {"not-one-hole", ErrorCode::kNotOneHole},
        {"not-full-gap-measure", ErrorCode::kNotFullGapMeasure},
        {"integration-failure", ErrorCode::kIntegrationFailure},
        {"minimization-failed", ErrorCode::kMinimizationFailed}};
    const auto it = table.find(s);
    return it == table.end() ? ErrorCode::kInvalidInput : it->second;
}

// ------------------------------------------------------------ parsing

const json& section(const json& cfg, const char* key) {
    static const json empty = json::object();
    if (cfg.contains(key) && cfg[key].is_object()) return cfg[key];
    return empty;
}

ContinuedFraction parse_cf(const json& cfg) {
    const json& c = section(cfg, "cf");
    std::vector<std::int64_t> pattern{1};
    if (c.contains("partial_quotients")) {
        require(c["partial_quotients"].is_array() && !c["partial_quotients"].empty(),
                ErrorCode::kInvalidInput, "cf.partial_quotients must be a non-empty array");
        pattern = c["partial_quotients"].get<std::vector<std::int64_t>>();
    }
    const int depth = c.value("depth", 80);
    require(depth >= 2 && depth <= 10'000, ErrorCode::kInvalidInput, "cf.depth must lie in 2..1e4");
    return ContinuedFraction::periodic(pattern, depth);
}

double parse_real(const json& v, const ContinuedFraction& cf, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    require(v.is_string(), ErrorCode::kInvalidInput, what + " must be a number or string");
    const std::string s = v.get<std::string>();
    if (s == "alpha") return cf.alpha_double();
    if (s == "pi") return kPi;
    try {
        const auto slash = s.find('/');
        if (slash == std::string::npos) return std::stod(s);
        const std::string den = s.substr(slash + 1);
        return std::stod(s.substr(0, slash)) / (den == "pi" ? kPi : std::stod(den));
    } catch (const std::logic_error&) {
        fail(ErrorCode::kInvalidInput, what + ": cannot parse '" + s + "'");
    }
}

Angle parse_angle(const json& v, const ContinuedFraction& cf, const std::string& what) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "alpha") return cf.alpha();
        if (s.find("pi") == std::string::npos) return Angle::parse(s);
    }
    return Angle::from_double(parse_real(v, cf, what));
}

std::vector<std::int64_t> parse_schedule(const json& j, std::vector<std::int64_t> fallback) {
    if (!j.is_array()) return fallback;
    std::vector<std::int64_t> out;
    for (const auto& v : j) out.push_back(static_cast<std::int64_t>(std::llround(v.get<double>())));
    return out;
}

ScanThresholds parse_thresholds(const json& scan) {
    ScanThresholds th;
    const json& t = section(scan, "thresholds");
    th.decay = t.value("decay", th.decay);
    th.eigen = t.value("eigen", th.eigen);
    th.stability = t.value("stability", th.stability);
    th.monotone_fraction = t.value("monotone_fraction", th.monotone_fraction);
    return th;
}

std::pair<std::int64_t, std::int64_t> parse_ratio(const std::string& s) {
    const auto slash = s.find('/');
    require(slash != std::string::npos, ErrorCode::kInvalidInput, "rotation target must be 'p/q'");
    return {std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
}

std::vector<double> draw_unit(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return out;
}

JumpSequence default_jumps() { return JumpSequence::geometric(0.1, 0.5, 60, 1.0); }

// ------------------------------------------------------------ run context

struct Context {
    json config;
    std::uint64_t seed = 0;
    fs::path dir;
    std::vector<std::string> files;
    std::vector<std::string> operations;

    void op(const std::string& name) {
        if (std::find(operations.begin(), operations.end(), name) == operations.end()) {
            operations.push_back(name);
        }
    }
    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        require(static_cast<bool>(out), ErrorCode::kInvalidInput,
                "cannot write " + (dir / name).string());
        out << content;
        files.push_back(name);
    }
};

std::string fmt_csv_row(std::initializer_list<double> values) {
    std::string row;
    char buf[40];
    bool first = true;
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!first) row += ',';
        row += buf;
        first = false;
    }
    return row + "\n";
}

// ------------------------------------------------------------ experiments

json one_hole_rigidity(Context& ctx) {
    const json& cfg = ctx.config;
    const ContinuedFraction cf = parse_cf(cfg);
    json v;

    JumpSequence jumps = default_jumps();
    if (cfg.contains("model")) {
        const json& m = cfg["model"];
        const Angle beta = parse_angle(m.value("beta", json("0")), cf, "model.beta");
        HoleSpec hole = HoleSpec::geometric(beta, m.value("C", 1.0), m.value("Delta", 0.5),
                                            m.value("K_gap", 60));
        const DenjoyModel model(cf, {hole}, 0.0);
        const double a = m.value("psi_amplitude", 0.1);
        const auto psi = [a](double x) { return 1.0 + a * std::cos(2.0 * kPi * x); };
        ctx.op("jumps_from_ceiling");
        const JumpSequence raw = jumps_from_ceiling(model, psi);
        // Mean-one normalization of the ceiling.
        std::vector<std::pair<std::int64_t, double>> support;
        for (std::int64_t k = raw.k_min(); k <= raw.k_max(); ++k) {
            support.emplace_back(k, raw.delta(k) / raw.mean());
        }
        jumps = JumpSequence::finite(support, 1.0, 1e-9);
        const json& sp = section(cfg, "spread");
        const auto m_max = sp.value("denjoy_m_max", std::int64_t{1000});
        ctx.op("denjoy_birkhoff_spread");
        v["denjoy_spread"] = {{"m_max", m_max},
                              {"spread", denjoy_birkhoff_spread(
                                             model, [&](double x) { return psi(x) / raw.mean(); },
                                             m_max, sp.value("grid", 100))}};
    } else if (cfg.contains("jumps")) {
        jumps = JumpSequence::from_json(cfg["jumps"]);
    }
    v["jumps"] = jumps.to_json();

    ctx.op("sigma_from_jumps");
    const SigmaSequence sigma = sigma_from_jumps(jumps);
    v["sigma_l1"] = sigma.l1;

    const json& sp = section(cfg, "spread");
    ctx.op("birkhoff_spread");
    const SpreadReport spread =
        birkhoff_spread(jumps, cf, sp.value("m_max", std::int64_t{10'000}), sp.value("grid", 100));
    ctx.write("spread.csv", spread.to_csv());
    v["spread"] = spread.to_json();

    ctx.op("transfer_function");
    const CoboundaryCheck cob =
        coboundary_residual(jumps, cf, cfg.value("coboundary_samples", 10'000), ctx.seed);
    v["coboundary"] = {{"max_residual", cob.max_residual}, {"samples", cob.samples},
                       {"tolerance", 1e-9}, {"ok", cob.max_residual < 1e-9}};

    const SpecialFlow flow(cf, CeilingFunction::jump_bv(jumps, cf));
    const double lambda = 2.0 * kPi / jumps.mean();
    const json& scan_cfg = section(cfg, "scan");
    const auto schedule = parse_schedule(scan_cfg.value("N_schedule", json()), {1000, 10'000, 100'000});
    const auto xs = draw_unit(ctx.seed, scan_cfg.value("x_samples", 5));
    ctx.op("eigenvalue_scan");
    const ScanResult scan = eigenvalue_scan(flow, {lambda}, schedule, xs, parse_thresholds(scan_cfg));
    ctx.write("weyl_scan.csv", scan.to_csv());
    const WeylReport& rep = scan.reports.front();

    const double oracle = std::abs(transfer_phase_integral(*flow.ceiling().cocycle(), lambda));
    double worst = 0.0;
    for (const auto& row : rep.magnitudes) worst = std::max(worst, std::abs(row.back() - oracle));
    const double tol = scan_cfg.value("oracle_tolerance", 0.02);
    v["eigenvalue"] = {{"lambda", lambda},
                       {"max_over_x", rep.max_over_x},
                       {"min_over_x", rep.min_over_x},
                       {"oracle", oracle},
                       {"oracle_gap", worst},
                       {"oracle_tolerance", tol},
                       {"verdict", to_string(rep.verdict)}};

    const bool bounded = spread.within_bound && cob.max_residual < 1e-9;
    const bool eigen = rep.verdict == WeylVerdict::kEigenvalueEvidence && worst < tol;
    v["verdict"] = std::string(bounded ? "bounded-spread" : "unbounded-spread") + " + " +
                   (eigen ? "eigenvalue-evidence" : std::string(to_string(rep.verdict)));
    return v;
}

std::vector<std::pair<Observable, Observable>> mixing_pairs(const CeilingFunction& ceiling) {
    Observable lower = [ceiling](double x, double s) {
        return std::complex<double>(s < 0.5 * ceiling(x) ? 1.0 : 0.0);
    };
    Observable box = [](double x, double s) {
        return std::complex<double>(x >= 0.25 && x < 0.75 && s < 0.5 ? 1.0 : 0.0);
    };
    return {{lower, lower}, {box, box}};
}

json two_hole_weak_mixing(Context& ctx) {
    const json& cfg = ctx.config;
    const ContinuedFraction cf = parse_cf(cfg);
    const Angle beta = parse_angle(cfg.value("beta", json("1/2")), cf, "beta");
    const double eps = parse_real(cfg.value("epsilon", json("1/pi")), cf, "epsilon");
    const std::int64_t K = cfg.value("relation_K", std::int64_t{50});
    json v;

    ctx.op("in_L_alpha");
    const auto rel = find_l_alpha_relation(eps, cf, K);
    v["in_L_alpha"] = {{"K", K}, {"relation_found", rel.has_value()},
                       {"evidence", rel ? "not-in-L-alpha" : "in-L-alpha-evidence"}};
    if (rel) v["in_L_alpha"]["relation"] = {{"l", rel->l}, {"k", rel->k}, {"p", rel->p}};

    ctx.op("general_position");
    const GeneralPositionReport gp = general_position(cf, beta, cf.depth());
    ctx.write("general_position.csv", gp.to_csv());
    v["general_position"] = gp.to_json();

    if (cfg.contains("denjoy")) {
        const json& d = cfg["denjoy"];
        const int k_gap = d.value("K_gap", 200);
        std::vector<HoleSpec> holes{
            HoleSpec::geometric(Angle::exact(0, 1), d.value("C", 1.0), d.value("Delta", 0.5), k_gap),
            HoleSpec::geometric(beta, d.value("C", 1.0), d.value("Delta", 0.5), k_gap)};
        const DenjoyModel model(cf, holes, d.value("cantor_mass", 0.5));
        ctx.op("semiconj_h");
        double worst = 0.0;
        for (double x : draw_unit(ctx.seed ^ 0x5eedULL, d.value("samples", 1000))) {
            const CantorPoint p = model.locate(x);
            worst = std::max(worst, circle_norm(model.semiconj_h(model.map(p)) -
                                                model.semiconj_h(p) - model.alpha()));
        }
        v["denjoy"] = {{"holes", 2}, {"cantor_mass", model.cantor_mass()},
                       {"semiconjugacy_residual", worst}};
    }

    const CeilingFunction ceiling = make_step_ceiling(eps, beta);
    const SpecialFlow flow(cf, ceiling);
    const json& scan_cfg = section(cfg, "scan");
    const auto grid = default_lambda_grid(eps, scan_cfg.value("grid_points", 400),
                                          scan_cfg.value("suspect_l", 20));
    const auto schedule = parse_schedule(scan_cfg.value("N_schedule", json()), {1000, 10'000, 100'000});
    const auto xs = draw_unit(ctx.seed, scan_cfg.value("x_samples", 5));
    ctx.op("eigenvalue_scan");
    const ScanResult scan = eigenvalue_scan(flow, grid, schedule, xs, parse_thresholds(scan_cfg));
    ctx.write("weyl_scan.csv", scan.to_csv());

    ctx.op("ks_exclusion");
    std::string ks_csv = "lambda,status,l\n";
    json violations = json::array();
    std::size_t excluded = 0;
    for (const auto& r : scan.reports) {
        const KsResult ks = ks_exclusion(eps, cf, r.lambda, K);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g,%s,%lld\n", r.lambda,
                      std::string(to_string(ks.status)).c_str(), static_cast<long long>(ks.l));
        ks_csv += buf;
        if (ks.status == KsStatus::kExcludedByStepLemma) {
            ++excluded;
            if (r.verdict == WeylVerdict::kEigenvalueEvidence) {
                violations.push_back({{"lambda", r.lambda}, {"magnitude", r.min_over_x.back()}});
            }
        }
    }
    ctx.write("ks_exclusion.csv", ks_csv);
    v["exclusion"] = {{"excluded_by_step_lemma", excluded}, {"violations", violations},
                      {"sound", violations.empty()}};
    v["scan"] = scan.to_json();

    const json& mx = section(cfg, "mixing");
    if (mx.value("enabled", true)) {
        CorrelationOptions opt;
        opt.dt = mx.value("dt", 0.5);
        opt.t_avg = mx.value("t_avg", 1e5);
        opt.x0 = draw_unit(ctx.seed + 1, 1).front();
        ctx.op("cesaro_mixing_test");
        const MixingResult mix = cesaro_mixing_test(flow, mixing_pairs(ceiling), mx.value("t_max", 1000.0),
                                                    mx.value("resolution", 1.0), opt,
                                                    mx.value("threshold_factor", 0.05));
        ctx.write("cesaro.csv", mix.to_csv());
        v["mixing"] = mix.to_json();
    }
    v["verdict"] = to_string(scan.verdict);
    return v;
}

json half_cover_corollary(Context& ctx) {
    const json& cfg = ctx.config;
    const ContinuedFraction cf = parse_cf(cfg);
    const int depth = cfg.value("depth", cf.depth());
    json v;
    ctx.op("half_general_position_certificate");
    const ParityCertificate cert = half_general_position_certificate(cf, depth);
    v["parity"] = {{"odd_count", cert.odd_indices.size()},
                   {"depth", depth},
                   {"covers_every_pair", cert.covers_every_pair},
                   {"consecutive_coprime", cert.consecutive_coprime},
                   {"infinitely_many_evidence", static_cast<int>(cert.odd_indices.size()) >= depth / 3}};
    ctx.op("general_position");
    const GeneralPositionReport half = general_position(cf, Angle::exact(1, 2), depth);
    const GeneralPositionReport same = general_position(cf, cf.alpha(), depth);
    ctx.write("general_position_half.csv", half.to_csv());
    ctx.write("general_position_alpha.csv", same.to_csv());
    v["beta_half"] = to_string(half.verdict);
    v["beta_alpha"] = to_string(same.verdict);

    ctx.op("in_L_alpha");
    json eps_list = cfg.value("epsilons", json::array({"1/pi"}));
    json rels = json::array();
    for (const auto& e : eps_list) {
        const double eps = parse_real(e, cf, "epsilon");
        const auto rel = find_l_alpha_relation(eps, cf, cfg.value("relation_K", std::int64_t{50}));
        rels.push_back({{"epsilon", eps}, {"relation_found", rel.has_value()}});
    }
    v["in_L_alpha"] = rels;
    const bool ok = cert.covers_every_pair && static_cast<int>(cert.odd_indices.size()) >= depth / 3 &&
                    half.verdict == Evidence::kHolds && same.verdict == Evidence::kFails;
    v["verdict"] = ok ? "corollary-evidence" : "inconclusive";
    return v;
}

json am_pipeline(Context& ctx) {
    const json& cfg = ctx.config;
    HamiltonianSystem sys = HamiltonianSystem::from_json(
        cfg.value("system", json{{"H", {{"builtin", "standard"}, {"c", 0.5}}}, {"epsilon", 0.01}}));
    json v;
    v["system"] = sys.to_json();
    const auto samples = draw_unit(ctx.seed, 2 * cfg.value("map_samples", 8));

    // Integrable reference.
    HamiltonianSystem flat = sys;
    flat.epsilon = 0.0;
    flat.phi.reset();
    flat.flow_box.reset();
    double flat_err = 0.0;
    ctx.op("poincare_map");
    for (std::size_t i = 0; i + 1 < samples.size(); i += 2) {
        const double th = samples[i], r = 2.0 * samples[i + 1] - 0.5;
        const MapPoint m = poincare_map(flat, th, r);
        flat_err = std::max({flat_err, std::abs(m.theta - (th + r)), std::abs(m.r - r)});
    }
    v["integrable_map_error"] = flat_err;

    const json& tw = section(cfg, "twist");
    const auto range = tw.value("r_range", std::vector<double>{-0.5, 1.5});
    require(range.size() == 2, ErrorCode::kInvalidInput, "twist.r_range needs two values");
    ctx.op("twist_check");
    const TwistReport twist = twist_check(sys, range[0], range[1], tw.value("grid", 10));
    v["twist"] = twist.to_json();

    double det_err = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); i += 2) {
        const auto J = jacobian_fd(sys, samples[i], 2.0 * samples[i + 1] - 0.5);
        det_err = std::max(det_err, std::abs(J[0] * J[3] - J[1] * J[2] - 1.0));
    }
    v["jacobian_det_error"] = det_err;

    ctx.op("am_minimize");
    json orbits = json::array();
    bool orbits_ok = true;
    OrbitConfiguration last;
    const auto targets = cfg.value("orbits", std::vector<std::string>{"1/2", "2/3", "3/5", "5/8"});
    for (const auto& t : targets) {
        const auto [p, q] = parse_ratio(t);
        OrbitConfiguration o = am_minimize(sys, p, q, cfg.value("restarts", 4), ctx.seed);
        const double disp = orbit_displacement(sys, o);
        ctx.write("orbit_" + std::to_string(p) + "_" + std::to_string(q) + ".csv", o.to_csv());
        json oj = o.to_json();
        oj["displacement_error"] = std::abs(disp - static_cast<double>(p));
        orbits_ok = orbits_ok && o.monotone && std::abs(disp - static_cast<double>(p)) < 1e-6;
        orbits.push_back(oj);
        last = std::move(o);
    }
    v["orbits"] = orbits;

    if (!targets.empty() && cfg.value("lyapunov_T", 1000) > 0) {
        ctx.op("lyapunov_exponent");
        v["lyapunov"] = lyapunov_exponent(sys, last, cfg.value("lyapunov_T", 1000)).to_json();
    }

    if (cfg.contains("cantor")) {
        const json& c = cfg["cantor"];
        const ContinuedFraction cf = parse_cf(c);
        HamiltonianSystem chaotic = sys;
        chaotic.epsilon = c.value("epsilon", sys.epsilon);
        ctx.op("am_cantor_approx");
        const AmCantorApprox ca = am_cantor_approx(chaotic, cf, c.value("levels", 6), c.value("first_level", 1));
        ctx.write("am_points.csv", ca.to_csv());
        v["cantor"] = ca.to_json();
    }

    ctx.op("reparam_ceiling");
    HamiltonianSystem unit = sys;
    unit.flow_box.reset();
    unit.phi = TrigPoly::constant(1.0);
    double unit_err = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); i += 2) {
        unit_err = std::max(unit_err, std::abs(reparam_ceiling(unit, samples[i], samples[i + 1]) - 1.0));
    }
    const json& fb = section(cfg, "flow_box");
    HamiltonianSystem boxed = sys;
    boxed.phi.reset();
    boxed.flow_box = FlowBoxStep{fb.value("eps", 0.25), fb.value("beta", 0.5), fb.value("width", 0.05)};
    double step_err = 0.0;
    std::string step_csv = "theta,psi,expected\n";
    for (double th : draw_unit(ctx.seed + 7, 16)) {
        // Sample base points away from the transition windows.
        const FlowBoxStep& s = *boxed.flow_box;
        if ((th >= s.beta - s.width && th < s.beta) || th >= 1.0 - s.width) continue;
        const double expected = th < s.beta ? 1.0 - s.eps : 1.0 + s.eps;
        const double psi = reparam_ceiling(boxed, th, 0.5);
        step_err = std::max(step_err, std::abs(psi - expected));
        step_csv += fmt_csv_row({th, psi, expected});
    }
    ctx.write("reparam_step.csv", step_csv);
    v["reparam"] = {{"unit_error", unit_err}, {"step_error", step_err}, {"tolerance", 1e-10}};

    const bool ok = flat_err < 1e-10 && twist.monotone_twist && det_err < 1e-8 && orbits_ok &&
                    unit_err < 1e-10 && step_err < 1e-10;
    v["verdict"] = ok ? "am-pipeline-consistent" : "am-pipeline-check-failed";
    return v;
}

// ------------------------------------------------------------ validation helpers

void check(std::vector<Diagnostic>& out, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const LabError& e) {
        out.push_back({"error", std::string(to_string(e.code())), e.what()});
    } catch (const json::exception& e) {
        out.push_back({"error", "invalid-input", e.what()});
    } catch (const std::exception& e) {
        out.push_back({"error", "invalid-input", e.what()});
    }
}

void check_depth(std::vector<Diagnostic>& out, const ContinuedFraction& cf, std::int64_t needed,
                 const std::string& what) {
    const Rotation rot(cf);
    if (needed > rot.max_iterate()) {
        out.push_back({"error", "insufficient-depth",
                       what + " needs " + std::to_string(needed) +
                           " exact iterates but cf depth " + std::to_string(cf.depth()) +
                           " certifies only " + std::to_string(rot.max_iterate())});
    }
}

} // namespace

json to_json(const std::vector<Diagnostic>& diags) {
    json arr = json::array();
    for (const auto& d : diags) arr.push_back({{"level", d.level}, {"code", d.code}, {"message", d.message}});
    return arr;
}

std::vector<Diagnostic> validate_config(const json& cfg) {
    std::vector<Diagnostic> out;
    if (!cfg.is_object()) {
        out.push_back({"error", "invalid-input", "config must be a JSON object"});
        return out;
    }
    const std::string exp = cfg.value("experiment", std::string());
    if (!experiments().count(exp)) {
        out.push_back({"error", "invalid-input", "unknown experiment '" + exp + "'"});
        return out;
    }
    std::optional<ContinuedFraction> cf;
    check(out, [&] { cf = parse_cf(cfg); });
    if (!cf) return out;

    if (exp == "one-hole-rigidity") {
        check(out, [&] {
            JumpSequence j = cfg.contains("jumps") ? JumpSequence::from_json(cfg["jumps"]) : default_jumps();
            if (!cfg.contains("model")) certify_positive_ceiling(j);
            if (cfg.contains("model")) {
                const json& m = cfg["model"];
                require(m.value("Delta", 0.5) > 0.0 && m.value("Delta", 0.5) < 1.0,
                        ErrorCode::kInvalidInput, "model.Delta must lie in (0,1)");
                require(m.value("K_gap", 60) >= 0, ErrorCode::kInvalidInput, "model.K_gap must be >= 0");
            }
        });
        const json& scan = section(cfg, "scan");
        const auto sched = parse_schedule(scan.value("N_schedule", json()), {1000, 10'000, 100'000});
        check_depth(out, *cf, sched.empty() ? 0 : sched.back(), "scan.N_schedule");
        check_depth(out, *cf, section(cfg, "spread").value("m_max", std::int64_t{10'000}) + 61,
                    "spread.m_max");
    } else if (exp == "two-hole-weak-mixing") {
        check(out, [&] {
            const double eps = parse_real(cfg.value("epsilon", json("1/pi")), *cf, "epsilon");
            require(eps > 0.0 && eps < 1.0, ErrorCode::kInvalidInput,
                    "epsilon must lie in (0,1) (got " + std::to_string(eps) + ")");
        });
        check(out, [&] {
            const Angle beta = parse_angle(cfg.value("beta", json("1/2")), *cf, "beta");
            require(beta.value() > 0.0 && beta.value() < 1.0, ErrorCode::kInvalidInput,
                    "beta must lie in (0,1)");
            const GeneralPositionReport gp = general_position(*cf, beta, cf->depth());
            if (gp.verdict == Evidence::kFails) {
                out.push_back({"warning", "general-position",
                               "holes not in general position: ||q_n beta|| tends to 0 along the "
                               "convergent denominators"});
            }
        });
        const json& scan = section(cfg, "scan");
        const auto sched = parse_schedule(scan.value("N_schedule", json()), {1000, 10'000, 100'000});
        check_depth(out, *cf, sched.empty() ? 0 : sched.back(), "scan.N_schedule");
        const json& mx = section(cfg, "mixing");
        const double steps = (mx.value("t_avg", 1e5) + mx.value("t_max", 1000.0)) / 0.5;
        check_depth(out, *cf, static_cast<std::int64_t>(steps), "mixing.t_avg");
    } else if (exp == "half-cover-corollary") {
        const int depth = cfg.value("depth", cf->depth());
        if (depth < 2 || depth > cf->depth()) {
            out.push_back({"error", "insufficient-depth", "depth must lie in 2..cf.depth"});
        }
    } else if (exp == "am-pipeline") {
        check(out, [&] {
            HamiltonianSystem::from_json(cfg.value("system", json::object()));
        });
        check(out, [&] {
            for (const auto& t : cfg.value("orbits", std::vector<std::string>{})) {
                const auto [p, q] = parse_ratio(t);
                require(q >= 1 && q <= 10'000, ErrorCode::kInvalidInput, "orbit q must lie in 1..1e4");
                require(std::gcd(p, q) == 1, ErrorCode::kInvalidInput, "orbit " + t + " is not reduced");
            }
            require(section(cfg, "twist").value("grid", 10) >= 10, ErrorCode::kInvalidInput,
                    "twist.grid must be >= 10");
        });
    }
    return out;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::kInvalidInput, "cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::kInvalidInput, std::string("config is not valid JSON: ") + e.what());
    }
}

RunResult run_experiment(const json& config, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& d : validate_config(config)) {
        if (d.level == "error") fail(code_from_string(d.code), d.message);
    }
    Context ctx;
    ctx.config = config;
    ctx.seed = options.seed.value_or(config.value("seed", std::uint64_t{12345}));
    ctx.dir = options.out_dir.value_or(config.value("output_dir", std::string("lab-out")));
    fs::create_directories(ctx.dir);

    const std::string exp = config["experiment"].get<std::string>();
    json verdicts;
    if (exp == "one-hole-rigidity") verdicts = one_hole_rigidity(ctx);
    else if (exp == "two-hole-weak-mixing") verdicts = two_hole_weak_mixing(ctx);
    else if (exp == "half-cover-corollary") verdicts = half_cover_corollary(ctx);
    else verdicts = am_pipeline(ctx);
    verdicts["experiment"] = exp;

    ctx.write("verdicts.json", verdicts.dump(2) + "\n");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest{
        {"config", config},
        {"seed", ctx.seed},
        {"operations", ctx.operations},
        {"files", ctx.files},
        {"versions",
         {{"lab", kVersion},
          {"compiler", __VERSION__},
          {"boost", BOOST_LIB_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"kernel_isa", kernels::to_string(kernels::active_isa())}}},
        {"wall_time_s", wall}};
    std::ofstream(ctx.dir / "manifest.json") << manifest.dump(2) << "\n";
    ctx.files.push_back("manifest.json");
    return {ctx.dir.string(), verdicts, ctx.files};
}

} // namespace amlab::lab
