#include "amlab/hamiltonian/hamiltonian.hpp"

#include "amlab/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace amlab {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// theta, r, s, tangent (4), action
using MapState = std::array<double, 8>;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double ipow(double x, int n) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= x;
    return v;
}

void check_trig_phi(double value) {
    if (!(value > 0.0)) {
        fail(ErrorCode::kInvalidInput, "time change phi must stay positive along the orbit");
    }
}

// Reduced (theta, r, s) flow with the tangent cocycle and the Lagrangian action.
struct MapRhs {
    const HamiltonianSystem* sys;
    void operator()(const MapState& x, MapState& dx, double /*t*/) const {
        const double eps = sys->epsilon;
        const TrigDerivs d = sys->H.eval(x[0], x[1], x[2]);
        const double theta_dot = x[1] + eps * d.r;
        dx[0] = theta_dot;
        dx[1] = -eps * d.t;
        dx[2] = 1.0;
        const double j00 = eps * d.tr, j01 = 1.0 + eps * d.rr;
        const double j10 = -eps * d.tt, j11 = -eps * d.tr;
        dx[3] = j00 * x[3] + j01 * x[5];
        dx[4] = j00 * x[4] + j01 * x[6];
        dx[5] = j10 * x[3] + j11 * x[5];
        dx[6] = j10 * x[4] + j11 * x[6];
        dx[7] = x[1] * theta_dot - (0.5 * x[1] * x[1] + eps * d.v);
    }
};

MapState run_time_one(const HamiltonianSystem& sys, double theta, double r) {
    require(sys.map_steps >= 1, ErrorCode::kInvalidInput, "map_steps must be >= 1");
    MapState x{theta, r, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0};
    odeint::runge_kutta_fehlberg78<MapState> stepper;
    const MapRhs rhs{&sys};
    const double h = 1.0 / sys.map_steps;
    for (int i = 0; i < sys.map_steps; ++i) stepper.do_step(rhs, x, i * h, h);
    for (double v : x) {
        if (!std::isfinite(v)) fail(ErrorCode::kIntegrationFailure, "Poincare map diverged");
    }
    return x;
}

struct FullRhs {
    const HamiltonianSystem* sys;
    void operator()(const State& x, State& dx, double /*t*/) const {
        const double eps = sys->epsilon;
        const TrigDerivs d = sys->H.eval(x[0], x[1], x[2]);
        const double kr = x[1] + eps * d.r;
        const double kt = eps * d.t;
        const double ks = eps * d.s;
        dx = {kr, -kt, 1.0, -ks};
        if (sys->phi) {
            const TrigDerivs f = sys->phi->eval(x[0], x[1], x[2]);
            const double excess = x[3] + 0.5 * x[1] * x[1] + eps * d.v - sys->H0;
            dx[0] = f.v * kr + excess * f.r;
            dx[1] = -f.v * kt - excess * f.t;
            dx[2] = f.v;
            dx[3] = -f.v * ks - excess * f.s;
        }
    }
};

} // namespace

// ---------------------------------------------------------------- TrigPoly

TrigPoly::TrigPoly(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        require(std::isfinite(t.coef), ErrorCode::kInvalidInput, "trig coefficients must be finite");
        require(t.r_power >= 0 && t.r_power <= 8, ErrorCode::kInvalidInput,
                "r powers must lie in 0..8");
    }
}

TrigPoly TrigPoly::standard(double c) {
    return TrigPoly({{1.0, 1, 0, 0, false}, {0.5 * c, 1, 1, 0, false}, {0.5 * c, 1, -1, 0, false}});
}

TrigPoly TrigPoly::constant(double c) { return TrigPoly({{c, 0, 0, 0, false}}); }

TrigDerivs TrigPoly::eval(double theta, double r, double s) const noexcept {
    TrigDerivs d;
    for (const auto& t : terms_) {
        const double arg = kTwoPi * (t.a * theta + t.b * s);
        const double c = std::cos(arg), sn = std::sin(arg);
        const double f = t.sine ? sn : c;     // trig value
        const double fp = t.sine ? c : -sn;   // derivative w.r.t. arg
        const double rp = t.r_power == 0 ? 1.0 : ipow(r, t.r_power);
        const double drp = t.r_power == 0 ? 0.0 : t.r_power * ipow(r, t.r_power - 1);
        const double ddrp = t.r_power < 2 ? 0.0 : t.r_power * (t.r_power - 1) * ipow(r, t.r_power - 2);
        const double ka = kTwoPi * t.a, kb = kTwoPi * t.b;
        d.v += t.coef * rp * f;
        d.t += t.coef * rp * fp * ka;
        d.s += t.coef * rp * fp * kb;
        d.r += t.coef * drp * f;
        d.tt += -t.coef * rp * f * ka * ka;
        d.tr += t.coef * drp * fp * ka;
        d.rr += t.coef * ddrp * f;
    }
    return d;
}

double TrigPoly::sup_bound(double r_max) const noexcept {
    double b = 0.0;
    for (const auto& t : terms_) b += std::abs(t.coef) * ipow(std::abs(r_max), t.r_power);
    return b;
}

TrigPoly TrigPoly::from_json(const nlohmann::json& j) {
    if (j.is_number()) return constant(j.get<double>());
    require(j.is_object(), ErrorCode::kInvalidInput, "trig polynomial must be an object or number");
    if (j.contains("builtin")) {
        const std::string name = j["builtin"].get<std::string>();
        if (name == "standard") return standard(j.value("c", 0.0));
        if (name == "constant") return constant(j.value("value", 1.0));
        fail(ErrorCode::kInvalidInput, "unknown builtin trig polynomial '" + name + "'");
    }
    require(j.contains("terms") && j["terms"].is_array(), ErrorCode::kInvalidInput,
            "trig polynomial needs 'terms' or 'builtin'");
    std::vector<TrigTerm> terms;
    for (const auto& t : j["terms"]) {
        TrigTerm term;
        term.coef = t.at("coef").get<double>();
        term.a = t.value("theta", 0);
        term.b = t.value("s", 0);
        term.r_power = t.value("r_power", 0);
        const std::string kind = t.value("kind", std::string("cos"));
        require(kind == "cos" || kind == "sin", ErrorCode::kInvalidInput,
                "term kind must be 'cos' or 'sin'");
        term.sine = kind == "sin";
        terms.push_back(term);
    }
    return TrigPoly(std::move(terms));
}

nlohmann::json TrigPoly::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : terms_) {
        terms.push_back({{"coef", t.coef}, {"theta", t.a}, {"s", t.b}, {"r_power", t.r_power},
                         {"kind", t.sine ? "sin" : "cos"}});
    }
    return {{"terms", terms}};
}

// ---------------------------------------------------------------- system

double FlowBoxStep::inverse(double theta0) const noexcept {
    const double x = frac(theta0);
    const double lo = 1.0 - eps, hi = 1.0 + eps;
    auto blend = [](double a, double b, double t) {
        return a + (b - a) * (0.5 - 0.5 * std::cos(std::numbers::pi * t));
    };
    if (width > 0.0) {
        if (x >= beta - width && x < beta) return blend(lo, hi, (x - (beta - width)) / width);
        if (x >= 1.0 - width) return blend(hi, lo, (x - (1.0 - width)) / width);
    }
    return x < beta ? lo : hi;
}

HamiltonianSystem HamiltonianSystem::from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::kInvalidInput, "system must be a JSON object");
    HamiltonianSystem sys;
    sys.H = j.contains("H") ? TrigPoly::from_json(j["H"]) : TrigPoly::standard(0.0);
    sys.epsilon = j.value("epsilon", 0.0);
    sys.H0 = j.value("H0", 0.0);
    sys.map_steps = j.value("map_steps", 100);
    sys.tolerance = j.value("tolerance", 1e-13);
    require(std::isfinite(sys.epsilon), ErrorCode::kInvalidInput, "epsilon must be finite");
    require(sys.map_steps >= 1, ErrorCode::kInvalidInput, "map_steps must be >= 1");
    require(sys.tolerance > 0.0, ErrorCode::kInvalidInput, "tolerance must be > 0");
    if (j.contains("phi") && !j["phi"].is_null()) {
        const auto& p = j["phi"];
        if (p.is_object() && p.value("builtin", std::string()) == "flow-box-step") {
            FlowBoxStep fb;
            fb.eps = p.value("eps", 0.25);
            fb.beta = p.value("beta", 0.5);
            fb.width = p.value("width", 0.0);
            require(fb.eps > 0.0 && fb.eps < 1.0, ErrorCode::kInvalidInput,
                    "flow-box step needs 0 < eps < 1");
            require(fb.beta > fb.width && fb.beta < 1.0 - fb.width && fb.width >= 0.0,
                    ErrorCode::kInvalidInput, "flow-box transition windows must fit in (0,1)");
            sys.flow_box = fb;
        } else {
            sys.phi = TrigPoly::from_json(p);
        }
    }
    return sys;
}

nlohmann::json HamiltonianSystem::to_json() const {
    nlohmann::json j{{"H", H.to_json()}, {"epsilon", epsilon}, {"H0", H0},
                     {"map_steps", map_steps}, {"tolerance", tolerance}};
    if (phi) j["phi"] = phi->to_json();
    if (flow_box) {
        j["phi"] = {{"builtin", "flow-box-step"}, {"eps", flow_box->eps}, {"beta", flow_box->beta},
                    {"width", flow_box->width}};
    }
    return j;
}

double section_u(const HamiltonianSystem& sys, double theta, double r) {
    return sys.H0 - 0.5 * r * r - sys.epsilon * sys.H.value(theta, r, 0.0);
}

double hat_energy(const HamiltonianSystem& sys, const State& x) {
    return x[3] + 0.5 * x[1] * x[1] + sys.epsilon * sys.H.value(x[0], x[1], x[2]);
}

double energy(const HamiltonianSystem& sys, const State& x) {
    const double e = hat_energy(sys, x);
    if (sys.phi) return sys.phi->value(x[0], x[1], x[2]) * (e - sys.H0);
    return e;
}

State integrate(const HamiltonianSystem& sys, const State& x0, double t) {
    require(std::isfinite(t) && std::abs(t) <= 1e6, ErrorCode::kInvalidInput, "|t| must be <= 1e6");
    require(!sys.flow_box, ErrorCode::kInvalidInput,
            "the flow-box step time change has no gradient; use reparam_ceiling");
    State x = x0;
    if (t == 0.0) return x;
    auto stepper = odeint::make_controlled(sys.tolerance, sys.tolerance,
                                           odeint::runge_kutta_fehlberg78<State>());
    const FullRhs rhs{&sys};
    const double dir = t > 0 ? 1.0 : -1.0;
    double now = 0.0;
    double dt = dir * std::min(0.05, std::abs(t));
    std::int64_t guard = 0;
    while (dir * (t - now) > 0.0) {
        if (dir * (now + dt - t) > 0.0) dt = t - now;
        const auto res = stepper.try_step(rhs, x, now, dt);
        if (res == odeint::fail) {
            if (std::abs(dt) < 1e-12) fail(ErrorCode::kIntegrationFailure, "step size collapsed");
        }
        if (++guard > 500'000'000) fail(ErrorCode::kIntegrationFailure, "too many steps");
    }
    for (double v : x) {
        if (!std::isfinite(v)) fail(ErrorCode::kIntegrationFailure, "integration diverged");
    }
    return x;
}

MapPoint poincare_map(const HamiltonianSystem& sys, double theta, double r) {
    const MapState x = run_time_one(sys, theta, r);
    return {x[0], x[1], {x[3], x[4], x[5], x[6]}};
}

std::array<double, 4> jacobian_fd(const HamiltonianSystem& sys, double theta, double r, double h) {
    const MapPoint tp = poincare_map(sys, theta + h, r), tm = poincare_map(sys, theta - h, r);
    const MapPoint rp = poincare_map(sys, theta, r + h), rm = poincare_map(sys, theta, r - h);
    return {(tp.theta - tm.theta) / (2 * h), (rp.theta - rm.theta) / (2 * h),
            (tp.r - tm.r) / (2 * h), (rp.r - rm.r) / (2 * h)};
}

nlohmann::json TwistReport::to_json() const {
    return {{"min_dtheta_dr", min_derivative}, {"max_dtheta_dr", max_derivative},
            {"verdict", monotone_twist ? "monotone-twist" : "twist-fails"}};
}

TwistReport twist_check(const HamiltonianSystem& sys, double r_lo, double r_hi, int grid) {
    require(grid >= 10, ErrorCode::kInvalidInput, "twist grid must be at least 10x10");
    require(r_hi > r_lo, ErrorCode::kInvalidInput, "empty r range");
    TwistReport rep;
    rep.min_derivative = INFINITY;
    rep.max_derivative = -INFINITY;
    const double h = 1e-5;
    for (int i = 0; i < grid; ++i) {
        const double theta = static_cast<double>(i) / grid;
        for (int k = 0; k < grid; ++k) {
            const double r = r_lo + (r_hi - r_lo) * k / (grid - 1);
            const double d = (poincare_map(sys, theta, r + h).theta -
                              poincare_map(sys, theta, r - h).theta) / (2 * h);
            rep.min_derivative = std::min(rep.min_derivative, d);
            rep.max_derivative = std::max(rep.max_derivative, d);
        }
    }
    rep.monotone_twist = rep.min_derivative > 0.0;
    return rep;
}

Segment generating_function(const HamiltonianSystem& sys, double theta0, double theta1) {
    double r0 = theta1 - theta0;
    for (int it = 0; it < 60; ++it) {
        const MapState x = run_time_one(sys, theta0, r0);
        const double f = x[0] - theta1;
        const double b = x[4];
        require(b > 0.0, ErrorCode::kMinimizationFailed,
                "shooting left the twist region (d theta'/d r <= 0)");
        if (std::abs(f) < 1e-14 * (1.0 + std::abs(theta1)) || it == 59) {
            Segment seg;
            seg.r0 = r0;
            seg.r1 = x[1];
            seg.action = x[7];
            seg.h11 = x[3] / b;
            seg.h12 = -1.0 / b;
            seg.h22 = x[6] / b;
            if (std::abs(f) > 1e-10) fail(ErrorCode::kMinimizationFailed, "shooting did not converge");
            return seg;
        }
        r0 -= f / b;
    }
    fail(ErrorCode::kMinimizationFailed, "shooting did not converge");
}

// ---------------------------------------------------------------- Aubry-Mather

bool is_f_ordered(const std::vector<double>& theta) {
    const std::size_t q = theta.size();
    if (q <= 1) return true;
    std::vector<std::size_t> order(q);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> x(q);
    for (std::size_t i = 0; i < q; ++i) x[i] = frac(theta[i]);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<std::int64_t> rank(q);
    for (std::size_t k = 0; k < q; ++k) rank[order[k]] = static_cast<std::int64_t>(k);
    for (std::size_t k = 1; k < q; ++k) {
        if (!(x[order[k]] > x[order[k - 1]])) return false;
    }
    const auto Q = static_cast<std::int64_t>(q);
    const std::int64_t shift = ((rank[1] - rank[0]) % Q + Q) % Q;
    for (std::size_t i = 0; i < q; ++i) {
        const std::int64_t s = ((rank[(i + 1) % q] - rank[i]) % Q + Q) % Q;
        if (s != shift) return false;
    }
    return true;
}

namespace {

struct Evaluation {
    std::vector<Segment> segs;
    std::vector<double> grad;
    double action = 0.0;
    double grad_norm = 0.0;
};

Evaluation evaluate(const HamiltonianSystem& sys, const std::vector<double>& th, std::int64_t p) {
    const std::size_t q = th.size();
    Evaluation ev;
    ev.segs.resize(q);
    for (std::size_t i = 0; i < q; ++i) {
        const double next = i + 1 < q ? th[i + 1] : th[0] + static_cast<double>(p);
        ev.segs[i] = generating_function(sys, th[i], next);
        ev.action += ev.segs[i].action;
    }
    ev.grad.resize(q);
    for (std::size_t i = 0; i < q; ++i) {
        const Segment& prev = ev.segs[(i + q - 1) % q];
        ev.grad[i] = prev.r1 - ev.segs[i].r0;
        ev.grad_norm = std::max(ev.grad_norm, std::abs(ev.grad[i]));
    }
    return ev;
}

Eigen::SparseMatrix<double> hessian(const Evaluation& ev) {
    const auto q = static_cast<int>(ev.segs.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(4 * q));
    for (int i = 0; i < q; ++i) {
        const int j = (i + 1) % q;
        const Segment& s = ev.segs[static_cast<std::size_t>(i)];
        trip.emplace_back(i, i, s.h11);
        trip.emplace_back(j, j, s.h22);
        trip.emplace_back(i, j, s.h12);
        trip.emplace_back(j, i, s.h12);
    }
    Eigen::SparseMatrix<double> H(q, q);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

// Solves (H + mu I) d = g; false unless the shifted Hessian is positive definite.
bool shifted_newton(const Evaluation& ev, double mu, Eigen::VectorXd& d) {
    const auto q = static_cast<int>(ev.segs.size());
    Eigen::SparseMatrix<double> H = hessian(ev);
    if (mu > 0.0) {
        Eigen::SparseMatrix<double> I(q, q);
        I.setIdentity();
        H += mu * I;
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) return false;
    Eigen::VectorXd g(q);
    for (int i = 0; i < q; ++i) g[i] = ev.grad[static_cast<std::size_t>(i)];
    d = ldlt.solve(g);
    return ldlt.info() == Eigen::Success && d.allFinite();
}

// Levenberg-damped Newton step with acceptance on action or gradient decrease.
bool descent_step(const HamiltonianSystem& sys, std::int64_t p, Evaluation& ev,
                  std::vector<double>& th) {
    double mu = 0.0;
    Eigen::VectorXd d;
    for (int attempt = 0; attempt < 40; ++attempt) {
        if (shifted_newton(ev, mu, d)) {
            std::vector<double> trial = th;
            for (std::size_t i = 0; i < th.size(); ++i) trial[i] -= d[static_cast<Eigen::Index>(i)];
            try {
                Evaluation next = evaluate(sys, trial, p);
                if (next.action < ev.action + 1e-13 || next.grad_norm < ev.grad_norm) {
                    th = std::move(trial);
                    ev = std::move(next);
                    return true;
                }
            } catch (const LabError& e) {
                if (e.code() != ErrorCode::kMinimizationFailed) throw;
            }
        }
        mu = mu == 0.0 ? 1e-4 : 4.0 * mu;
    }
    return false;
}

bool is_monotone(const std::vector<double>& th, std::int64_t p) {
    for (std::size_t i = 0; i + 1 < th.size(); ++i) {
        if (!(th[i + 1] > th[i])) return false;
    }
    return th.front() + static_cast<double>(p) > th.back();
}

OrbitConfiguration finish(std::vector<double> th, std::int64_t p, const Evaluation& ev) {
    OrbitConfiguration o;
    o.p = p;
    o.q = static_cast<std::int64_t>(th.size());
    o.r.resize(th.size());
    for (std::size_t i = 0; i < th.size(); ++i) o.r[i] = ev.segs[i].r0;
    o.action = ev.action;
    o.gradient_norm = ev.grad_norm;
    o.monotone = is_monotone(th, p);
    o.f_ordered = is_f_ordered(th);
    o.theta = std::move(th);
    return o;
}

} // namespace

OrbitConfiguration am_minimize(const HamiltonianSystem& sys, std::int64_t p, std::int64_t q,
                               int restarts, std::uint64_t seed) {
    require(q >= 1 && q <= 10'000, ErrorCode::kInvalidInput, "q must lie in 1..1e4");
    require(std::gcd(p, q) == 1, ErrorCode::kInvalidInput, "p/q must be in lowest terms");
    require(restarts >= 1, ErrorCode::kInvalidInput, "restarts must be >= 1");
    const double omega = static_cast<double>(p) / static_cast<double>(q);
    const auto n = static_cast<std::size_t>(q);
    auto uniform = [&](double theta0) {
        std::vector<double> th(n);
        for (std::size_t i = 0; i < n; ++i) th[i] = theta0 + static_cast<double>(i) * omega;
        return th;
    };
    if (sys.epsilon == 0.0) {
        std::vector<double> th = uniform(0.0);
        const Evaluation ev = evaluate(sys, th, p);
        return finish(std::move(th), p, ev);
    }

    std::mt19937_64 rng(seed);
    std::optional<OrbitConfiguration> best;
    std::string last_problem = "no restart converged";
    for (int rs = 0; rs < restarts; ++rs) {
        std::vector<double> th = uniform(rs == 0 ? 0.0 : uniform01(rng));
        for (auto& v : th) v += (uniform01(rng) - 0.5) * 0.1 / static_cast<double>(q);
        try {
            Evaluation ev = evaluate(sys, th, p);
            for (int it = 0; it < 200 && ev.grad_norm >= 1e-11; ++it) {
                if (!descent_step(sys, p, ev, th)) break;
            }
            if (!(ev.grad_norm < 1e-10)) {
                last_problem = "critical point not reached (gradient " + std::to_string(ev.grad_norm) + ")";
                continue;
            }
            OrbitConfiguration o = finish(th, p, ev);
            if (!o.monotone) {
                last_problem = "critical point is not monotone";
                continue;
            }
            if (!best || o.action < best->action) best = std::move(o);
        } catch (const LabError& e) {
            if (e.code() != ErrorCode::kMinimizationFailed) throw;
            last_problem = e.what();
        }
    }
    if (!best) fail(ErrorCode::kMinimizationFailed, "am_minimize " + std::to_string(p) + "/" +
                                                        std::to_string(q) + ": " + last_problem);
    return *best;
}

std::string OrbitConfiguration::to_csv() const {
    std::ostringstream os;
    os << "i,theta,r\n";
    char buf[96];
    for (std::size_t i = 0; i < theta.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, theta[i], r[i]);
        os << buf;
    }
    return os.str();
}

nlohmann::json OrbitConfiguration::to_json() const {
    return {{"p", p}, {"q", q}, {"action", action}, {"gradient_norm", gradient_norm},
            {"monotone", monotone}, {"f_ordered", f_ordered}};
}

double orbit_displacement(const HamiltonianSystem& sys, const OrbitConfiguration& orbit) {
    double theta = orbit.theta.front();
    double r = orbit.r.front();
    for (std::int64_t i = 0; i < orbit.q; ++i) {
        const MapPoint m = poincare_map(sys, theta, r);
        theta = m.theta;
        r = m.r;
    }
    return theta - orbit.theta.front();
}

AmCantorApprox am_cantor_approx(const HamiltonianSystem& sys, const ContinuedFraction& cf,
                                int n_levels, int first_level) {
    require(first_level >= 1 && n_levels >= first_level && n_levels <= cf.depth(),
            ErrorCode::kInvalidInput, "levels must satisfy 1 <= first <= n_levels <= depth");
    AmCantorApprox out;
    OrbitConfiguration deepest;
    for (int n = first_level; n <= n_levels; ++n) {
        const auto p = static_cast<std::int64_t>(cf.p(n));
        const auto q = static_cast<std::int64_t>(cf.q(n));
        require(q <= 10'000, ErrorCode::kInvalidInput, "convergent denominator exceeds 1e4");
        OrbitConfiguration o = am_minimize(sys, p, q, 2, static_cast<std::uint64_t>(n));
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < o.theta.size(); ++i) pts.emplace_back(frac(o.theta[i]), o.r[i]);
        std::sort(pts.begin(), pts.end());
        CantorLevel lvl{p, q, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& a = pts[i];
            const auto& b = pts[(i + 1) % pts.size()];
            const double gap = i + 1 < pts.size() ? b.first - a.first : b.first + 1.0 - a.first;
            lvl.largest_gap = std::max(lvl.largest_gap, gap);
            if (gap > 0.0 && pts.size() > 1) {
                lvl.lipschitz = std::max(lvl.lipschitz, std::abs(b.second - a.second) / gap);
            }
        }
        lvl.gap_ratio = lvl.largest_gap * static_cast<double>(q);
        out.levels.push_back(lvl);
        out.points.insert(out.points.end(), pts.begin(), pts.end());
        deepest = std::move(o);
    }
    std::sort(out.points.begin(), out.points.end());

    // Largest gap of the deepest orbit and the lengths of its images.
    const std::size_t q = deepest.theta.size();
    std::vector<std::size_t> order(q);
    std::iota(order.begin(), order.end(), 0);
    auto x = [&](std::size_t i) { return frac(deepest.theta[i % q]); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a) < x(b); });
    std::size_t ia = 0, ib = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < q; ++k) {
        const std::size_t a = order[k], b = order[(k + 1) % q];
        const double g = frac(x(b) - x(a));
        const double len = q == 1 ? 1.0 : g;
        if (len > best) {
            best = len;
            ia = a;
            ib = b;
        }
    }
    out.gap_left = x(ia);
    out.gap_right = x(ib);
    const auto K = static_cast<std::int64_t>(std::min<std::size_t>(30, q > 2 ? (q - 1) / 2 : 0));
    const auto Q = static_cast<std::int64_t>(q);
    for (std::int64_t k = -K; k <= K; ++k) {
        const auto a = static_cast<std::size_t>(((static_cast<std::int64_t>(ia) + k) % Q + Q) % Q);
        const auto b = static_cast<std::size_t>(((static_cast<std::int64_t>(ib) + k) % Q + Q) % Q);
        out.iterate_lengths.emplace_back(k, frac(x(b) - x(a)));
    }
    if (out.iterate_lengths.size() >= 10) {
        bool positive = true;
        for (const auto& [k, l] : out.iterate_lengths) positive = positive && l > 0.0;
        if (positive) out.fit = gap_decay_fit(out.iterate_lengths);
    }
    return out;
}

std::string AmCantorApprox::to_csv() const {
    std::ostringstream os;
    os << "theta,r\n";
    char buf[96];
    for (const auto& [t, r] : points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, r);
        os << buf;
    }
    return os.str();
}

nlohmann::json AmCantorApprox::to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels) {
        lv.push_back({{"p", l.p}, {"q", l.q}, {"lipschitz", l.lipschitz},
                      {"largest_gap", l.largest_gap}, {"gap_ratio", l.gap_ratio}});
    }
    nlohmann::json j{{"levels", lv}, {"gap", {gap_left, gap_right}}};
    if (fit) j["gap_decay_fit"] = {{"C", fit->C}, {"Delta", fit->Delta}, {"r2", fit->r2}};
    return j;
}

// ---------------------------------------------------------------- time changes

double reparam_ceiling(const HamiltonianSystem& sys, double theta, double r) {
    require(sys.phi.has_value() || sys.flow_box.has_value(), ErrorCode::kInvalidInput,
            "reparam_ceiling needs a time change phi");
    // theta, r, s, Q
    using Q4 = std::array<double, 4>;
    const double theta0 = theta;
    auto rhs = [&](const Q4& x, Q4& dx, double) {
        const TrigDerivs d = sys.H.eval(x[0], x[1], x[2]);
        dx[0] = x[1] + sys.epsilon * d.r;
        dx[1] = -sys.epsilon * d.t;
        dx[2] = 1.0;
        if (sys.flow_box) {
            dx[3] = sys.flow_box->inverse(theta0);
        } else {
            const double f = sys.phi->value(x[0], x[1], x[2]);
            check_trig_phi(f);
            dx[3] = 1.0 / f;
        }
    };
    Q4 x{theta, r, 0.0, 0.0};
    odeint::runge_kutta_fehlberg78<Q4> stepper;
    const int steps = std::max(sys.map_steps, 100);
    const double h = 1.0 / steps;
    for (int i = 0; i < steps; ++i) stepper.do_step(rhs, x, i * h, h);
    require(std::isfinite(x[3]), ErrorCode::kIntegrationFailure, "quadrature diverged");
    return x[3];
}

double return_time(const HamiltonianSystem& sys, double theta, double r) {
    require(sys.phi.has_value(), ErrorCode::kInvalidInput,
            "return_time needs a trigonometric time change phi");
    State x{theta, r, 0.0, section_u(sys, theta, r)};
    const FullRhs rhs{&sys};
    auto stepper = odeint::make_controlled(sys.tolerance, sys.tolerance,
                                           odeint::runge_kutta_fehlberg78<State>());
    odeint::runge_kutta_fehlberg78<State> fixed;
    double t = 0.0;
    double dt = 0.01;
    for (std::int64_t guard = 0; guard < 10'000'000; ++guard) {
        State trial = x;
        double t_trial = t;
        double dt_trial = dt;
        if (stepper.try_step(rhs, trial, t_trial, dt_trial) == odeint::fail) {
            dt = dt_trial;
            if (dt < 1e-12) fail(ErrorCode::kIntegrationFailure, "step size collapsed");
            continue;
        }
        if (trial[2] < 1.0) {
            x = trial;
            t = t_trial;
            dt = dt_trial;
            continue;
        }
        // s crosses 1 inside this step: Newton on the step length.
        for (int it = 0; it < 8; ++it) {
            State dx;
            rhs(x, dx, t);
            const double tau = (1.0 - x[2]) / dx[2];
            if (std::abs(tau) < 1e-15) break;
            fixed.do_step(rhs, x, t, tau);
            t += tau;
        }
        return t;
    }
    fail(ErrorCode::kIntegrationFailure, "section s = 1 never reached");
}

nlohmann::json LyapunovResult::to_json() const {
    return {{"top", top}, {"second", second}, {"sum", top + second}, {"iterates", iterates}};
}

namespace {

LyapunovResult qr_exponents(const std::vector<std::array<double, 4>>& mats, int T) {
    double q00 = 1, q01 = 0, q10 = 0, q11 = 1;
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < T; ++k) {
        const auto& M = mats[static_cast<std::size_t>(k) % mats.size()];
        const double a00 = M[0] * q00 + M[1] * q10, a01 = M[0] * q01 + M[1] * q11;
        const double a10 = M[2] * q00 + M[3] * q10, a11 = M[2] * q01 + M[3] * q11;
        const double n1 = std::hypot(a00, a10);
        const double e00 = a00 / n1, e10 = a10 / n1;
        const double proj = e00 * a01 + e10 * a11;
        const double c01 = a01 - proj * e00, c11 = a11 - proj * e10;
        const double n2 = std::hypot(c01, c11);
        s1 += std::log(n1);
        s2 += std::log(n2);
        q00 = e00;
        q10 = e10;
        q01 = c01 / n2;
        q11 = c11 / n2;
    }
    return {s1 / T, s2 / T, T};
}

} // namespace

LyapunovResult lyapunov_exponent(const HamiltonianSystem& sys, const OrbitConfiguration& orbit,
                                 int T) {
    require(T >= 1000, ErrorCode::kInvalidInput, "T must be >= 1e3 iterates");
    std::vector<std::array<double, 4>> mats;
    for (std::size_t i = 0; i < orbit.theta.size(); ++i) {
        mats.push_back(poincare_map(sys, orbit.theta[i], orbit.r[i]).tangent);
    }
    return qr_exponents(mats, T);
}

LyapunovResult lyapunov_exponent(const HamiltonianSystem& sys, double theta, double r, int T) {
    require(T >= 1000, ErrorCode::kInvalidInput, "T must be >= 1e3 iterates");
    std::vector<std::array<double, 4>> mats;
    mats.reserve(static_cast<std::size_t>(T));
    for (int k = 0; k < T; ++k) {
        const MapPoint m = poincare_map(sys, theta, r);
        mats.push_back(m.tangent);
        theta = m.theta;
        r = m.r;
    }
    return qr_exponents(mats, T);
}

} // namespace amlab
