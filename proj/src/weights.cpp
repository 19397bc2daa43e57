#include "conefront/weights.hpp"

#include "conefront/expr.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <sstream>

namespace conefront {

namespace {

double checked(double v, const std::string& id) {
    if (!std::isfinite(v) || v <= 0.0)
        throw MalformedWeightError("weight '" + id + "' evaluated to a nonpositive or non-finite value");
    return v;
}

}  // namespace

WeightSpec WeightSpec::constant(double c, int d) {
    if (!(c > 0.0)) throw MalformedWeightError("constant weight must be positive");
    WeightSpec w;
    w.d = d;
    w.id = "const(" + std::to_string(c) + ")";
    w.fn = [c](const Pt&, const Pt&) { return c; };
    return w;
}

WeightSpec WeightSpec::japanese_bracket(double s, int d) {
    WeightSpec w;
    w.d = d;
    std::ostringstream os;
    os << "bracket^" << s;
    w.id = os.str();
    w.fn = [s, d](const Pt&, const Pt& xi) { return std::pow(bracket(xi, d), s); };
    return w;
}

WeightSpec WeightSpec::hypoelliptic(std::vector<std::pair<double, std::array<int, 2>>> monomials, int d) {
    WeightSpec w;
    w.d = d;
    w.id = "hypoelliptic";
    w.fn = [m = std::move(monomials), d](const Pt&, const Pt& xi) {
        double a = 0.0;
        for (const auto& [coef, exps] : m) {
            double t = coef;
            for (int ax = 0; ax < d; ++ax)
                for (int k = 0; k < exps[ax]; ++k) t *= xi[ax];
            a += t;
        }
        return 1.0 + std::abs(a);
    };
    return w;
}

WeightSpec WeightSpec::heat() {
    WeightSpec w;
    w.d = 2;
    w.id = "heat";
    w.fn = [](const Pt&, const Pt& xi) { return 1.0 + xi[0] * xi[0] + std::abs(xi[1]); };
    return w;
}

WeightSpec WeightSpec::expression(const std::string& text, int d) {
    Expr e = Expr::parse(text, d);
    WeightSpec w;
    w.d = d;
    w.id = "expr(" + text + ")";
    w.x_independent = !e.depends_on_x();
    w.fn = [e](const Pt& x, const Pt& xi) { return e.eval(x, xi); };
    return w;
}

WeightSpec WeightSpec::product(std::vector<std::pair<WeightSpec, double>> factors) {
    if (factors.empty()) throw MalformedWeightError("product weight needs at least one factor");
    WeightSpec w;
    w.d = factors.front().first.d;
    std::ostringstream os;
    bool x_indep = true;
    for (size_t i = 0; i < factors.size(); ++i) {
        if (factors[i].first.d != w.d) throw MalformedWeightError("product weight factors disagree on dimension");
        x_indep = x_indep && factors[i].first.x_independent;
        os << (i ? "*" : "") << "(" << factors[i].first.id << ")^" << factors[i].second;
    }
    w.id = os.str();
    w.x_independent = x_indep;
    w.fn = [f = std::move(factors)](const Pt& x, const Pt& xi) {
        double v = 1.0;
        for (const auto& [wi, p] : f) v *= std::pow(wi.fn(x, xi), p);
        return v;
    };
    return w;
}

double eval_weight(const WeightSpec& w, const Pt& x, const Pt& xi) {
    if (!w.fn) throw MalformedWeightError("weight has no evaluator");
    return checked(w.fn(x, xi), w.id);
}

WeightSpec WeightSpec::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int d = j.value("d", 1);
    if (kind == "preset") {
        const std::string name = j.at("name").get<std::string>();
        if (name == "japanese_bracket") return japanese_bracket(j.at("s").get<double>(), d);
        if (name == "constant") return constant(j.value("c", 1.0), d);
        if (name == "heat") return heat();
        if (name == "hypoelliptic") {
            std::vector<std::pair<double, std::array<int, 2>>> monomials;
            for (const auto& m : j.at("monomials")) {
                std::array<int, 2> exps{0, 0};
                const auto& e = m.at("exps");
                for (size_t a = 0; a < e.size() && a < 2; ++a) exps[a] = e[a].get<int>();
                monomials.emplace_back(m.at("coef").get<double>(), exps);
            }
            return hypoelliptic(std::move(monomials), d);
        }
        throw MalformedWeightError("unknown weight preset '" + name + "'");
    }
    if (kind == "expr" || kind == "expression") return expression(j.at("expr").get<std::string>(), d);
    if (kind == "product") {
        std::vector<std::pair<WeightSpec, double>> factors;
        for (const auto& f : j.at("factors")) factors.emplace_back(from_json(f), f.value("power", 1.0));
        return product(std::move(factors));
    }
    throw MalformedWeightError("unknown weight kind '" + kind + "'");
}

nlohmann::json WeightSpec::to_json() const {
    // Weights are closed over their evaluators; serialization keeps the id only.
    return nlohmann::json{{"id", id}, {"d", d}};
}

LatticeSpec LatticeSpec::xi_box(int d, double r, int n) {
    LatticeSpec l;
    l.d = d;
    for (int a = 0; a < d; ++a) {
        l.xi_min[a] = -r;
        l.xi_max[a] = r;
        l.xi_count[a] = n;
    }
    return l;
}

LatticeSpec LatticeSpec::phase_box(int d, double rx, int nx, double rxi, int nxi) {
    LatticeSpec l = xi_box(d, rxi, nxi);
    for (int a = 0; a < d; ++a) {
        l.x_min[a] = -rx;
        l.x_max[a] = rx;
        l.x_count[a] = nx;
    }
    return l;
}

namespace {

std::vector<Pt> lattice_points(int d, const Pt& lo, const Pt& hi, const std::array<int, 2>& count) {
    std::vector<Pt> pts;
    const int n0 = count[0];
    const int n1 = (d == 2) ? count[1] : 1;
    pts.reserve(static_cast<size_t>(n0) * n1);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            Pt p = Pt::Zero();
            p[0] = (n0 == 1) ? lo[0] : lo[0] + (hi[0] - lo[0]) * i / double(n0 - 1);
            if (d == 2) p[1] = (n1 == 1) ? lo[1] : lo[1] + (hi[1] - lo[1]) * j / double(n1 - 1);
            pts.push_back(p);
        }
    }
    return pts;
}

}  // namespace

std::vector<Pt> LatticeSpec::x_points() const { return lattice_points(d, x_min, x_max, x_count); }
std::vector<Pt> LatticeSpec::xi_points() const { return lattice_points(d, xi_min, xi_max, xi_count); }

double LatticeSpec::x_step(int axis) const {
    return x_count[axis] > 1 ? (x_max[axis] - x_min[axis]) / (x_count[axis] - 1) : 1.0;
}
double LatticeSpec::xi_step(int axis) const {
    return xi_count[axis] > 1 ? (xi_max[axis] - xi_min[axis]) / (xi_count[axis] - 1) : 1.0;
}

ModerateReport check_moderate(const WeightSpec& w, const WeightSpec& v, const LatticeSpec& lattice) {
    if (w.d != v.d) throw MalformedWeightError("check_moderate: dimension mismatch");
    ModerateReport rep;
    const auto xs = lattice.x_points();
    const auto xis = lattice.xi_points();
    // z and y both run over the phase lattice; the ratio is
    // omega(z + y) / (omega(z) * v(y)).
    for (const auto& zx : xs) {
        for (const auto& zxi : xis) {
            const double wz = eval_weight(w, zx, zxi);
            for (const auto& yx : xs) {
                for (const auto& yxi : xis) {
                    const double vy = eval_weight(v, yx, yxi);
                    const double wzy = eval_weight(w, zx + yx, zxi + yxi);
                    const double ratio = wzy / (wz * vy);
                    if (!std::isfinite(ratio))
                        throw MalformedWeightError("check_moderate: non-finite ratio");
                    rep.max_violation_ratio = std::max(rep.max_violation_ratio, ratio);
                    ++rep.samples_tested;
                }
            }
        }
    }
    rep.estimated_C = rep.max_violation_ratio;
    rep.pass = rep.max_violation_ratio <= rep.estimated_C;
    return rep;
}

double finite_difference(const std::function<double(const Pt&, const Pt&)>& f,
                         std::array<int, 2> alpha, std::array<int, 2> beta, const Pt& x,
                         const Pt& xi, const Pt& hx, const Pt& hxi) {
    for (int a = 0; a < 2; ++a) {
        if (alpha[a] > 0) {
            auto al = alpha;
            al[a] -= 1;
            Pt xp = x, xm = x;
            xp[a] += hx[a];
            xm[a] -= hx[a];
            return (finite_difference(f, al, beta, xp, xi, hx, hxi) -
                    finite_difference(f, al, beta, xm, xi, hx, hxi)) /
                   (2.0 * hx[a]);
        }
    }
    for (int a = 0; a < 2; ++a) {
        if (beta[a] > 0) {
            auto be = beta;
            be[a] -= 1;
            Pt xip = xi, xim = xi;
            xip[a] += hxi[a];
            xim[a] -= hxi[a];
            return (finite_difference(f, alpha, be, x, xip, hx, hxi) -
                    finite_difference(f, alpha, be, x, xim, hx, hxi)) /
                   (2.0 * hxi[a]);
        }
    }
    return f(x, xi);
}

bool shell_bounded(const std::vector<std::pair<double, double>>& samples, double* slope_out) {
    // Shell k collects |xi| in [2^k, 2^{k+1}); boundedness on the unseen tail
    // is decided by the fitted growth of per-shell sups.
    std::map<int, double> shell_sup;
    double global_sup = 0.0;
    for (const auto& [r, ratio] : samples) {
        global_sup = std::max(global_sup, ratio);
        if (r < 1.0) continue;
        const int k = static_cast<int>(std::floor(std::log2(r)));
        auto [it, inserted] = shell_sup.try_emplace(k, ratio);
        if (!inserted) it->second = std::max(it->second, ratio);
    }
    if (slope_out) *slope_out = 0.0;
    if (shell_sup.size() < 2 || global_sup == 0.0) return true;
    std::vector<double> ks, logs;
    for (const auto& [k, sup] : shell_sup) {
        if (sup <= 0.0) continue;
        ks.push_back(k);
        logs.push_back(std::log2(sup));
    }
    if (ks.size() < 2) return true;
    const LineFit fit = fit_line(ks, logs);
    if (slope_out) *slope_out = fit.slope;
    return fit.slope <= 0.1;
}

const ClassEntry* ClassReport::find(std::array<int, 2> alpha, std::array<int, 2> beta) const {
    for (const auto& e : entries)
        if (e.alpha == alpha && e.beta == beta) return &e;
    return nullptr;
}

namespace {

std::vector<std::array<int, 2>> multi_indices(int d, int max_total) {
    std::vector<std::array<int, 2>> out;
    for (int i = 0; i <= max_total; ++i) {
        if (d == 1) {
            out.push_back({i, 0});
        } else {
            for (int j = 0; i + j <= max_total; ++j) out.push_back({i, j});
        }
    }
    return out;
}

int total(const std::array<int, 2>& m) { return m[0] + m[1]; }

}  // namespace

ClassReport check_class_rho_delta(const WeightSpec& w, double rho, double delta, int max_order,
                                  const LatticeSpec& lattice) {
    if (max_order > 4) throw DomainError("check_class_rho_delta: max_order must be <= 4");
    ClassReport rep;
    rep.rho = rho;
    rep.delta = delta;
    rep.max_order = max_order;

    const auto xs = lattice.x_points();
    const auto xis = lattice.xi_points();
    Pt hx = Pt::Ones(), hxi = Pt::Ones();
    for (int a = 0; a < w.d; ++a) {
        hx[a] = lattice.x_step(a);
        hxi[a] = lattice.xi_step(a);
    }

    for (const auto& alpha : multi_indices(w.d, max_order)) {
        for (const auto& beta : multi_indices(w.d, max_order)) {
            if (total(alpha) + total(beta) > max_order) continue;
            ClassEntry entry;
            entry.alpha = alpha;
            entry.beta = beta;
            std::vector<std::pair<double, double>> samples;
            samples.reserve(xs.size() * xis.size());
            for (const auto& x : xs) {
                for (const auto& xi : xis) {
                    const double om = eval_weight(w, x, xi);
                    const double der = finite_difference(w.fn, alpha, beta, x, xi, hx, hxi);
                    if (!std::isfinite(der))
                        throw MalformedWeightError("check_class_rho_delta: non-finite derivative");
                    const double weight_pow = std::pow(bracket(xi, w.d), rho * total(beta) - delta * total(alpha));
                    const double ratio = weight_pow * std::abs(der) / om;
                    entry.sup_ratio = std::max(entry.sup_ratio, ratio);
                    double r = 0.0;
                    for (int a = 0; a < w.d; ++a) r += xi[a] * xi[a];
                    samples.emplace_back(std::sqrt(r), ratio);
                }
            }
            entry.bounded = shell_bounded(samples, &entry.shell_slope);
            rep.entries.push_back(entry);
        }
    }
    return rep;
}

}  // namespace conefront
