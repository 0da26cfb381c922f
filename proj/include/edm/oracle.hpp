#ifndef EDM_ORACLE_HPP
#define EDM_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "edm/diag.hpp"
#include "edm/model.hpp"

namespace edm {

using SpMat = Eigen::SparseMatrix<std::complex<double>>;
using DenseMat = Eigen::MatrixXcd;

struct FockTruncation {
    int n_c = 8;   // highest kept Fock level of the photon-like mode
    int n_b = 8;   // highest kept Fock level of the spin-wave mode
    double guard = 1e-4;

    void validate() const {
        if (n_c < 1 || n_b < 1) throw ConfigError("truncation: need at least levels 0..1");
        if (!(guard > 0.0)) throw ConfigError("truncation: guard must be > 0");
    }
    int dim() const { return (n_c + 1) * (n_b + 1); }
};

namespace detail {

inline std::complex<double> z(double re, double im = 0.0) { return {re, im}; }

inline SpMat ladder(int n_max) {
    SpMat a(n_max + 1, n_max + 1);
    std::vector<Eigen::Triplet<std::complex<double>>> tr;
    tr.reserve(static_cast<std::size_t>(n_max));
    for (int i = 0; i < n_max; ++i) tr.emplace_back(i, i + 1, z(std::sqrt(i + 1.0)));
    a.setFromTriplets(tr.begin(), tr.end());
    return a;
}

inline SpMat sparse_identity(int n) {
    SpMat id(n, n);
    id.setIdentity();
    return id;
}

inline SpMat kron(const SpMat& a, const SpMat& b) {
    SpMat c(a.rows() * b.rows(), a.cols() * b.cols());
    std::vector<Eigen::Triplet<std::complex<double>>> tr;
    tr.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
                    tr.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                                    static_cast<int>(ia.col() * b.cols() + ib.col()),
                                    ia.value() * ib.value());
    c.setFromTriplets(tr.begin(), tr.end());
    return c;
}

inline void prune_small(SpMat& m, double tol = 1e-14) {
    m.prune([tol](int, int, const std::complex<double>& v) { return std::abs(v) > tol; });
}

} // namespace detail

struct ModeOperators {
    SpMat c;  // photon-mode annihilation, acts on the first tensor factor
    SpMat b;  // spin-wave annihilation, acts on the second tensor factor
};

inline ModeOperators build_mode_operators(const FockTruncation& tr) {
    tr.validate();
    ModeOperators m;
    m.c = detail::kron(detail::ladder(tr.n_c), detail::sparse_identity(tr.n_b + 1));
    m.b = detail::kron(detail::sparse_identity(tr.n_c + 1), detail::ladder(tr.n_b));
    return m;
}

struct DressedOperators {
    SpMat d1;
    SpMat d2;
};

// Polariton annihilation operators as linear combinations of the mode
// ladder operators and their adjoints.
inline DressedOperators build_dressed_operators(const ModeOperators& m,
                                                const BogoliubovCoefficients& bc) {
    using detail::z;
    const SpMat cd = m.c.adjoint();
    const SpMat bd = m.b.adjoint();
    DressedOperators d;
    d.d1 = z(bc.alpha1) * m.c + z(bc.beta1) * cd + z(bc.gamma1) * m.b + z(bc.delta1) * bd;
    d.d2 = z(bc.alpha2) * m.c + z(bc.beta2) * cd + z(bc.gamma2) * m.b + z(bc.delta2) * bd;
    return d;
}

inline SpMat number_op(const SpMat& a) {
    SpMat n = a.adjoint() * a;
    detail::prune_small(n);
    return n;
}

// H = eps1 d1'd1 + eps2 d2'd2, the quadratic expansion around the broken
// minimum with the constant dropped.
inline SpMat hamiltonian_matrix(const DiagonalizationResult& dg, const DressedOperators& d) {
    using detail::z;
    SpMat h = z(dg.eps1) * (d.d1.adjoint() * d.d1) + z(dg.eps2) * (d.d2.adjoint() * d.d2);
    detail::prune_small(h);
    return h;
}

inline double bose_einstein(double nu, double temperature) {
    if (!(nu > 0.0)) throw ConfigError("bose_einstein: mode frequency must be positive");
    if (temperature < 0.0) throw ConfigError("bose_einstein: temperature must be >= 0");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(nu / temperature);
}

struct Channel {
    SpMat L, Ld, LdL, LLd;
    double rate = 0.0;
    double n_th = 0.0;
};

inline Channel make_channel(const SpMat& jump_op, double rate, double n_th = 0.0) {
    if (rate < 0.0) throw ConfigError("channel: rate must be >= 0");
    if (n_th < 0.0) throw ConfigError("channel: thermal occupation must be >= 0");
    Channel ch;
    ch.L = jump_op;
    ch.Ld = jump_op.adjoint();
    ch.LdL = ch.Ld * ch.L;
    ch.LLd = ch.L * ch.Ld;
    detail::prune_small(ch.LdL);
    detail::prune_small(ch.LLd);
    ch.rate = rate;
    ch.n_th = n_th;
    return ch;
}

// dρ/dt = −i[H,ρ] + Σ rate·[(n+1)(2LρL' − {L'L,ρ}) + n(2L'ρL − {LL',ρ})].
// Reference form; evolve() uses an algebraically identical folded drift.
inline DenseMat lindblad_rhs(const DenseMat& rho, const SpMat& H,
                             const std::vector<Channel>& channels) {
    if (H.rows() != rho.rows() || H.cols() != rho.cols())
        throw ConfigError("lindblad_rhs: shape mismatch");
    DenseMat out = detail::z(0.0, -1.0) * (H * rho - rho * H);
    for (const Channel& ch : channels) {
        if (ch.rate == 0.0) continue;
        const double cd = ch.rate * (ch.n_th + 1.0);
        const DenseMat lr = ch.L * rho;
        out += cd * (2.0 * (lr * ch.Ld) - ch.LdL * rho - rho * ch.LdL);
        if (ch.n_th > 0.0) {
            const double cu = ch.rate * ch.n_th;
            const DenseMat ldr = ch.Ld * rho;
            out += cu * (2.0 * (ldr * ch.L) - ch.LLd * rho - rho * ch.LLd);
        }
    }
    return out;
}

// Population of the highest kept Fock level of each mode.
inline std::pair<double, double> edge_populations(const DenseMat& rho,
                                                  const FockTruncation& tr) {
    double edge_c = 0.0, edge_b = 0.0;
    for (int ib = 0; ib <= tr.n_b; ++ib)
        edge_c += rho(tr.n_c * (tr.n_b + 1) + ib, tr.n_c * (tr.n_b + 1) + ib).real();
    for (int ic = 0; ic <= tr.n_c; ++ic)
        edge_b += rho(ic * (tr.n_b + 1) + tr.n_b, ic * (tr.n_b + 1) + tr.n_b).real();
    return {edge_c, edge_b};
}

inline double expectation(const DenseMat& rho, const SpMat& op) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (SpMat::InnerIterator it(op, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc.real();
}

inline double fidelity(const DenseMat& rho, const Eigen::VectorXcd& psi) {
    return psi.dot(rho * psi).real();
}

inline std::pair<double, Eigen::VectorXcd> ground_state(const SpMat& H) {
    Eigen::SelfAdjointEigenSolver<DenseMat> es{DenseMat(H)};
    if (es.info() != Eigen::Success) throw NumericError("ground_state: eigensolver failed");
    return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

inline double min_eigenvalue(const DenseMat& rho) {
    const DenseMat herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMat> es{herm, Eigen::EigenvaluesOnly};
    if (es.info() != Eigen::Success) throw NumericError("min_eigenvalue: eigensolver failed");
    return es.eigenvalues()(0);
}

inline DenseMat vacuum_density(int dim) {
    DenseMat rho = DenseMat::Zero(dim, dim);
    rho(0, 0) = 1.0;
    return rho;
}

inline DenseMat pure_density(const Eigen::VectorXcd& psi) { return psi * psi.adjoint(); }

inline double suggested_dt(std::initializer_list<double> scales) {
    double m = 0.0;
    for (double s : scales) m = std::max(m, std::fabs(s));
    if (m == 0.0) throw ConfigError("suggested_dt: all scales vanish");
    return 0.01 / m;
}

struct EvolutionResult {
    DenseMat rho;
    std::vector<double> t;
    std::vector<std::vector<double>> observables;  // one row per record time
    double max_edge_c = 0.0;
    double max_edge_b = 0.0;
    double max_trace_err = 0.0;
};

// Fixed-step RK4 on the full density matrix. The Hamiltonian commutator and
// both anticommutator halves are folded into one non-Hermitian drift G so a
// step costs two sparse-dense products plus two per active jump term.
inline EvolutionResult evolve(DenseMat rho0, const SpMat& H, const std::vector<Channel>& channels,
                              double t_end, double dt, const FockTruncation& tr,
                              const std::vector<SpMat>& observables = {}, int record_every = 100) {
    tr.validate();
    if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("evolve: need dt > 0 and t_end > 0");
    if (record_every < 1) throw ConfigError("evolve: record_every must be >= 1");
    const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
    if (n_steps == 0) throw ConfigError("evolve: t_end shorter than one step");

    SpMat gm = detail::z(0.0, -1.0) * H;
    struct Jump {
        double coef;
        const SpMat* a;
        const SpMat* b;
    };
    std::vector<Jump> jumps;
    for (const Channel& ch : channels) {
        if (ch.rate == 0.0) continue;
        gm = gm - detail::z(ch.rate * (ch.n_th + 1.0)) * ch.LdL -
             detail::z(ch.rate * ch.n_th) * ch.LLd;
        jumps.push_back({2.0 * ch.rate * (ch.n_th + 1.0), &ch.L, &ch.Ld});
        if (ch.n_th > 0.0) jumps.push_back({2.0 * ch.rate * ch.n_th, &ch.Ld, &ch.L});
    }
    detail::prune_small(gm);
    gm.makeCompressed();
    SpMat gmd = gm.adjoint();
    gmd.makeCompressed();

    const auto dim = rho0.rows();
    DenseMat k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), yt(dim, dim),
        tmp(dim, dim), tmp2(dim, dim);
    auto rhs = [&](const DenseMat& r, DenseMat& out) {
        out.noalias() = gm * r;
        out.noalias() += r * gmd;
        for (const Jump& j : jumps) {
            tmp.noalias() = (*j.a) * r;
            tmp2.noalias() = tmp * (*j.b);
            out += j.coef * tmp2;
        }
    };

    EvolutionResult res;
    auto record = [&](double t, const DenseMat& rho) {
        res.t.push_back(t);
        std::vector<double> row;
        row.reserve(observables.size());
        for (const SpMat& op : observables) row.push_back(expectation(rho, op));
        res.observables.push_back(std::move(row));
        const auto edges = edge_populations(rho, tr);
        res.max_edge_c = std::max(res.max_edge_c, edges.first);
        res.max_edge_b = std::max(res.max_edge_b, edges.second);
        res.max_trace_err = std::max(res.max_trace_err, std::abs(rho.trace() - detail::z(1.0)));
        if (edges.first > tr.guard || edges.second > tr.guard) {
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "truncation too small: edge populations (%.3e, %.3e) exceed guard "
                          "%.3e at t=%.6g",
                          edges.first, edges.second, tr.guard, t);
            throw TruncationError(msg);
        }
    };

    DenseMat rho = std::move(rho0);
    record(0.0, rho);
    for (std::size_t i = 0; i < n_steps; ++i) {
        rhs(rho, k1);
        yt = rho + (0.5 * dt) * k1;
        rhs(yt, k2);
        yt = rho + (0.5 * dt) * k2;
        rhs(yt, k3);
        yt = rho + dt * k3;
        rhs(yt, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if ((i + 1) % static_cast<std::size_t>(record_every) == 0 || i + 1 == n_steps)
            record(static_cast<double>(i + 1) * dt, rho);
    }
    res.rho = std::move(rho);
    return res;
}

inline std::pair<double, double> thermal_occupations(const DenseMat& rho,
                                                     const DressedOperators& d) {
    return {expectation(rho, number_op(d.d1)), expectation(rho, number_op(d.d2))};
}

// Max interior-block residual of the quadrature identities that map the mode
// quadratures onto the polariton ones. Both sides are linear in the same
// truncated ladder matrices, so the residual probes only the coefficients.
inline double cmn_identity_residual(const DiagonalizationResult& dg, const ModelParams& mp,
                                    const FockTruncation& tr) {
    using detail::z;
    const ModeOperators m = build_mode_operators(tr);
    const BogoliubovCoefficients bc = bogoliubov_coefficients(dg, mp);
    const DressedOperators d = build_dressed_operators(m, bc);
    const double cx = std::cos(dg.chi), sx = std::sin(dg.chi);

    auto self_plus_adjoint = [](const SpMat& a) {
        const SpMat ad = a.adjoint();
        return SpMat(ad + a);
    };
    const SpMat q1 = self_plus_adjoint(d.d1);
    const SpMat q2 = self_plus_adjoint(d.d2);
    const SpMat photon_lhs = self_plus_adjoint(m.c);
    const SpMat photon_rhs = z(cx * std::sqrt(dg.eps1 / mp.omega)) * q1 -
                             z(sx * std::sqrt(dg.eps2 / mp.omega)) * q2;
    const SpMat spin_lhs = z(std::sqrt(mp.s / 2.0)) * self_plus_adjoint(m.b);
    const SpMat spin_rhs = z(sx * std::sqrt(mp.s * dg.eps1 / (2.0 * dg.f_cap))) * q1 +
                           z(cx * std::sqrt(mp.s * dg.eps2 / (2.0 * dg.f_cap))) * q2;

    auto interior_max = [&](const SpMat& diff) {
        double mx = 0.0;
        for (int k = 0; k < diff.outerSize(); ++k)
            for (SpMat::InnerIterator it(diff, k); it; ++it) {
                const int rc = static_cast<int>(it.row()) / (tr.n_b + 1);
                const int rb = static_cast<int>(it.row()) % (tr.n_b + 1);
                const int cc = static_cast<int>(it.col()) / (tr.n_b + 1);
                const int cb = static_cast<int>(it.col()) % (tr.n_b + 1);
                if (rc == tr.n_c || cc == tr.n_c || rb == tr.n_b || cb == tr.n_b) continue;
                mx = std::max(mx, std::abs(it.value()));
            }
        return mx;
    };
    const SpMat dphoton = photon_lhs - photon_rhs;
    const SpMat dspin = spin_lhs - spin_rhs;
    return std::max(interior_max(dphoton), interior_max(dspin));
}

// Least-squares slope of log(values) over the early-time window where the
// signal still dominates; returns the positive decay rate.
inline double fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& v,
                                   double floor_frac = 0.05) {
    if (t.size() != v.size() || t.size() < 3)
        throw NumericError("fit_exponential_rate: need at least 3 samples");
    if (!(v.front() > 0.0)) throw NumericError("fit_exponential_rate: signal must start positive");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(v[i] > floor_frac * v.front())) continue;
        const double y = std::log(v[i]);
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
        ++n;
    }
    if (n < 3) throw NumericError("fit_exponential_rate: too few usable samples");
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw NumericError("fit_exponential_rate: degenerate time grid");
    return -(n * sxy - sx * sy) / denom;
}

} // namespace edm

#endif
