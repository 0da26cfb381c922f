#ifndef EDM_DYNAMICS_HPP
#define EDM_DYNAMICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "edm/model.hpp"

namespace edm {

enum class SolverMethod { RK4Fixed, RK45Adaptive };

struct SolverConfig {
    SolverMethod method = SolverMethod::RK45Adaptive;
    double dt = 1e-3;       // fixed step size, and initial trial step for the adaptive method
    double rtol = 1e-9;
    double atol = 1e-12;
    double t_end = 100.0;
    int record_stride = 1;  // record every n-th accepted step; the final state is always kept
    std::size_t max_steps = 200000000;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("solver: dt must be > 0");
        if (!(t_end > 0.0)) throw ConfigError("solver: t_end must be > 0");
        if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("solver: tolerances must be > 0");
        if (record_stride < 1) throw ConfigError("solver: record_stride must be >= 1");
    }
};

template <typename S>
struct Trajectory {
    std::vector<double> t;
    std::vector<S> y;

    std::size_t size() const { return t.size(); }
    const S& back() const { return y.back(); }
    double t_back() const { return t.back(); }
};

template <typename S, typename RHS>
S rk4_step(RHS&& f, double t, const S& y, double h) {
    const S k1 = f(y, t);
    const S k2 = f(y + (0.5 * h) * k1, t + 0.5 * h);
    const S k3 = f(y + (0.5 * h) * k2, t + 0.5 * h);
    const S k4 = f(y + h * k3, t + h);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

// Dormand-Prince 5(4) pair. The fifth-order weights equal the last stage row,
// so the last evaluation of an accepted step seeds the next one.
struct Dopri5Tableau {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                            e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                            e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
};

} // namespace detail

template <typename S, typename RHS>
Trajectory<S> integrate(RHS&& f, const S& y0, const SolverConfig& cfg) {
    cfg.validate();
    Trajectory<S> out;
    out.t.push_back(0.0);
    out.y.push_back(y0);

    if (cfg.method == SolverMethod::RK4Fixed) {
        const auto n = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
        if (n == 0) throw ConfigError("solver: t_end shorter than one step");
        S y = y0;
        for (std::size_t i = 0; i < n; ++i) {
            y = rk4_step(f, static_cast<double>(i) * cfg.dt, y, cfg.dt);
            if (!y.is_finite()) throw NumericError("integration diverged");
            if ((i + 1) % static_cast<std::size_t>(cfg.record_stride) == 0 || i + 1 == n) {
                out.t.push_back(static_cast<double>(i + 1) * cfg.dt);
                out.y.push_back(y);
            }
        }
        return out;
    }

    using T = detail::Dopri5Tableau;
    constexpr int dim = S::dim;
    S y = y0;
    double t = 0.0;
    double h = std::min(cfg.dt, cfg.t_end);
    double err_old = 1e-4;
    S k1 = f(y, t);
    std::size_t accepted = 0;
    for (std::size_t steps = 0; t < cfg.t_end; ++steps) {
        if (steps >= cfg.max_steps) throw NumericError("integration exceeded max_steps");
        if (h < 1e-14 * cfg.t_end) throw NumericError("adaptive step size underflow");
        // Stretch by up to a percent to land exactly on t_end instead of
        // leaving a sliver that would underflow the controller.
        bool last = false;
        if (t + 1.01 * h >= cfg.t_end) {
            h = cfg.t_end - t;
            last = true;
        }

        const S k2 = f(y + h * (T::a21 * k1), t + T::c2 * h);
        const S k3 = f(y + h * (T::a31 * k1 + T::a32 * k2), t + T::c3 * h);
        const S k4 = f(y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3), t + T::c4 * h);
        const S k5 = f(y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4),
                       t + T::c5 * h);
        const S k6 = f(y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 +
                                T::a65 * k5),
                       t + h);
        const S ynew =
            y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
        const S k7 = f(ynew, t + h);
        const S ediff = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 +
                             T::e7 * k7);

        const auto ya = y.to_array();
        const auto yb = ynew.to_array();
        const auto ea = ediff.to_array();
        double err = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double sc =
                cfg.atol + cfg.rtol * std::max(std::fabs(ya[i]), std::fabs(yb[i]));
            err = std::max(err, std::fabs(ea[i]) / sc);
        }

        if (err <= 1.0) {
            t = last ? cfg.t_end : t + h;
            y = ynew;
            k1 = k7;
            if (!y.is_finite()) throw NumericError("integration diverged");
            ++accepted;
            if (accepted % static_cast<std::size_t>(cfg.record_stride) == 0 ||
                t >= cfg.t_end) {
                out.t.push_back(t);
                out.y.push_back(y);
            }
            const double e = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_old, 0.04);
            fac = std::clamp(fac, 0.2, 10.0);
            h *= fac;
            err_old = e;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    if (out.t.back() != t) {
        out.t.push_back(t);
        out.y.push_back(y);
    }
    return out;
}

// Newton iteration on rhs(y) = 0 with a central-difference Jacobian. Refines
// analytic stationary points and validates them against the actual flow.
template <typename S, typename RHS>
S refine_fixed_point(RHS&& f, const S& guess, double tol = 1e-12, int max_iter = 60) {
    constexpr int dim = S::dim;
    using Vec = Eigen::Matrix<double, dim, 1>;
    using Mat = Eigen::Matrix<double, dim, dim>;

    auto residual = [&](const std::array<double, dim>& a) {
        return f(S::from_array(a), 0.0).to_array();
    };

    std::array<double, dim> x = guess.to_array();
    for (int it = 0; it < max_iter; ++it) {
        const auto r = residual(x);
        double rn = 0.0;
        for (int i = 0; i < dim; ++i) rn = std::max(rn, std::fabs(r[i]));
        if (rn < tol) return S::from_array(x);

        Mat jac;
        for (int j = 0; j < dim; ++j) {
            const double hj = 1e-7 * std::max(1.0, std::fabs(x[j]));
            auto xp = x, xm = x;
            xp[j] += hj;
            xm[j] -= hj;
            const auto rp = residual(xp);
            const auto rm = residual(xm);
            for (int i = 0; i < dim; ++i) jac(i, j) = (rp[i] - rm[i]) / (2.0 * hj);
        }
        Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) throw NumericError("refine_fixed_point: singular Jacobian");
        Vec rv;
        for (int i = 0; i < dim; ++i) rv(i) = r[i];
        const Vec dx = lu.solve(rv);
        for (int i = 0; i < dim; ++i) x[i] -= dx(i);
        if (!std::isfinite(x[0])) throw NumericError("refine_fixed_point diverged");
    }
    throw NumericError("refine_fixed_point: no convergence");
}

inline std::vector<std::pair<double, double>> energy_series(const Trajectory<State>& traj,
                                                            const ModelParams& mp) {
    std::vector<std::pair<double, double>> out;
    out.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        out.emplace_back(traj.t[i], energy(traj.y[i], mp));
    return out;
}

// Earliest recorded time after which the trajectory stays within tol of the
// target in the max norm. Empty when the final point is still outside.
template <typename S>
std::optional<double> detect_convergence(const Trajectory<S>& traj, const S& target,
                                         double tol) {
    std::ptrdiff_t first_inside = -1;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double d = (traj.y[i] - target).inf_norm();
        if (d <= tol) {
            if (first_inside < 0) first_inside = static_cast<std::ptrdiff_t>(i);
        } else {
            first_inside = -1;
        }
    }
    if (first_inside < 0) return std::nullopt;
    return traj.t[static_cast<std::size_t>(first_inside)];
}

} // namespace edm

#endif
