#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "edm/dynamics.hpp"
#include "edm/semiclassical.hpp"

using namespace edm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
ModelParams reference_params() {
    ModelParams mp;
    mp.omega = 1.0;
    mp.e_z = 0.2;
    mp.g = 0.46;
    mp.eps = -1.0;
    mp.s = 1.0;
    mp.kappa1 = 0.02;
    mp.kappa2 = 0.02;
    return mp;
}
} // namespace

TEST_CASE("unitary flow is stationary at both minima", "[semiclassical]") {
    const ModelParams mp = reference_params();
    REQUIRE(unitary_rhs(normal_minimum(mp).first, mp).inf_norm() < 1e-15);
    const State sr = superradiant_minimum(mp, +1).state();
    REQUIRE(unitary_rhs(sr, mp).inf_norm() < 1e-15);
    REQUIRE(unitary_rhs(superradiant_minimum(mp, -1).state(), mp).inf_norm() < 1e-15);
}

TEST_CASE("bare flow pins the polarized pole", "[semiclassical]") {
    const ModelParams mp = reference_params();
    const State pole{0.0, 0.0, 0.0, 0.0, mp.s};
    REQUIRE(bare_rhs(pole, mp).inf_norm() < 1e-15);
    // ... but not the broken minimum: the spin rows pull toward the pole.
    const State sr = superradiant_minimum(mp, +1).state();
    REQUIRE(bare_rhs(sr, mp).inf_norm() > 1e-3);
}

TEST_CASE("damped critical values at the reference point", "[semiclassical]") {
    const ModelParams mp = reference_params();
    const auto [gc, eps_c] = damped_critical_values(mp);
    REQUIRE_THAT(gc, WithinRel(0.44953398091801694, 1e-14));
    REQUIRE_THAT(eps_c, WithinRel(-0.0003998400639744215, 1e-12));
    // Damping shifts the threshold upward.
    REQUIRE(gc > critical_coupling_undamped(mp));

    ModelParams flat = mp;
    flat.eps = 0.5;  // no transition when the quartic term is repulsive enough
    REQUIRE_THROWS_AS(damped_critical_values(flat), PhaseError);

    ModelParams undamped = mp;
    undamped.kappa1 = undamped.kappa2 = 0.0;
    const auto [gc0, eps_c0] = damped_critical_values(undamped);
    REQUIRE_THAT(gc0, WithinRel(critical_coupling_undamped(undamped), 1e-15));
    REQUIRE_THAT(eps_c0, WithinAbs(0.0, 1e-15));
}

TEST_CASE("stationary points of the damped bare flow", "[semiclassical]") {
    const ModelParams mp = reference_params();
    const auto pts = bare_fixed_points(mp);
    REQUIRE(pts.size() == 3);

    for (const State& fp : pts) {
        REQUIRE(bare_rhs(fp, mp).inf_norm() < 1e-14);
        // Every stationary point sits at the polarized energy, independent of
        // the damping rates.
        REQUIRE_THAT(energy(fp, mp), WithinAbs(-mp.e_z * mp.s, 1e-13));
    }

    const State& plus = pts[1];
    REQUIRE_THAT(plus.q, WithinAbs(0.00268235, 1e-7));
    REQUIRE_THAT(plus.p, WithinAbs(-0.13411753, 1e-7));
    REQUIRE_THAT(plus.sx, WithinAbs(-0.02916765, 1e-7));
    REQUIRE_THAT(plus.sy, WithinAbs(0.29167647, 1e-7));
    REQUIRE_THAT(plus.sz, WithinAbs(0.95501323, 1e-7));
    const State& minus = pts[2];
    REQUIRE_THAT(minus.sy, WithinRel(-plus.sy, 1e-14));
    REQUIRE_THAT(minus.p, WithinRel(-plus.p, 1e-14));

    // The broken-branch points disappear when damping pushes the threshold
    // past g, leaving only the pole.
    ModelParams heavy = mp;
    heavy.kappa2 = 0.10;
    REQUIRE(bare_fixed_points(heavy).size() == 1);

    // With the damping switched off the bare flow is the unitary one, whose
    // stationary set in the broken phase is a whole circle at the minimum
    // S_z. The returned points land on that circle with the spin contracted
    // below full length, still at the polarized energy; the minimum itself
    // is a different point of the same circle.
    ModelParams undamped = mp;
    undamped.kappa1 = undamped.kappa2 = 0.0;
    const auto free_pts = bare_fixed_points(undamped);
    REQUIRE(free_pts.size() == 3);
    const SRMinimum sr = superradiant_minimum(undamped, +1);
    const State& fp = free_pts[1];
    REQUIRE(bare_rhs(fp, undamped).inf_norm() < 1e-14);
    REQUIRE(fp.q == 0.0);
    REQUIRE(fp.sx == 0.0);
    REQUIRE_THAT(fp.sz, WithinRel(sr.sz_sr, 1e-14));
    REQUIRE_THAT(fp.p, WithinRel(-undamped.g * fp.sy, 1e-14));
    REQUIRE_THAT(fp.sy * fp.sy, WithinRel(2.0 * fp.sz * (undamped.s - fp.sz), 1e-13));
    REQUIRE_THAT(energy(fp, undamped), WithinAbs(-undamped.e_z * undamped.s, 1e-13));
    REQUIRE(bare_rhs(sr.state(), undamped).inf_norm() < 1e-14);
    REQUIRE(sr.energy < energy(fp, undamped));
    REQUIRE(fp.spin_norm2() < undamped.s * undamped.s);
}

TEST_CASE("shifted and rotated dissipator is stationary at the minimum", "[semiclassical]") {
    const ModelParams mp = reference_params();
    for (int branch : {+1, -1}) {
        const SRMinimum sr = superradiant_minimum(mp, branch);
        REQUIRE(adhoc_rotated_rhs(sr.state(), mp, sr).inf_norm() < 1e-14);
    }
    // Perturbed along the spin, the flow carries the state back into the
    // minimum. Note the energy itself is not monotone for spin-length
    // perturbations: off the |S| = S sphere it can start below E_SR.
    const SRMinimum sr = superradiant_minimum(mp, +1);
    State st = sr.state();
    st.sy += 0.01;
    SolverConfig cfg;
    cfg.t_end = 800.0;
    cfg.record_stride = 1000;
    const auto traj = integrate(
        [&](const State& s, double) { return adhoc_rotated_rhs(s, mp, sr); }, st, cfg);
    REQUIRE((traj.back() - sr.state()).inf_norm() < 1e-6);
    REQUIRE_THAT(energy(traj.back(), mp), WithinAbs(sr.energy, 1e-9));

    ModelParams normal = mp;
    normal.g = 0.3;
    REQUIRE_THROWS_AS(adhoc_rotated_rhs(State{}, normal), PhaseError);
}

TEST_CASE("polariton-channel dissipator is stationary at the minimum", "[semiclassical]") {
    const ModelParams mp = reference_params();
    const DiagonalizationResult dg = diagonalize(mp, +1);
    const DressedCoefficients dc = dressed_coefficients(dg, mp);
    const State sr = superradiant_minimum(mp, +1).state();
    REQUIRE(dressed_rhs(sr, mp, dg, dc, {0.003, 0.02}).inf_norm() < 1e-14);
    // Zero viscosities reduce it to the unitary flow.
    State st = sr;
    st.q += 0.05;
    const State lhs = dressed_rhs(st, mp, dg, dc, {0.0, 0.0});
    const State rhs = unitary_rhs(st, mp);
    REQUIRE((lhs - rhs).inf_norm() < 1e-15);
}

TEST_CASE("single-oscillator fixed points", "[semiclassical]") {
    ShiftedHOParams hp;
    hp.omega = 1.0;
    hp.p0 = 2.0;
    hp.kappa = 0.1;

    hp.shifted_dissipator = false;
    const HOState fx = shifted_ho_fixed_point(hp);
    REQUIRE_THAT(fx.q, WithinRel(-0.19801980198019803, 1e-14));
    REQUIRE_THAT(fx.p, WithinRel(1.9801980198019802, 1e-14));
    REQUIRE(shifted_ho_rhs(fx, hp).inf_norm() < 1e-15);
    // The unshifted variant parks away from the energy minimum (0, p0).
    REQUIRE(ho_energy(fx, hp) > 1e-4);

    hp.shifted_dissipator = true;
    const HOState fx2 = shifted_ho_fixed_point(hp);
    REQUIRE(fx2.q == 0.0);
    REQUIRE(fx2.p == 2.0);
    REQUIRE(shifted_ho_rhs(fx2, hp).inf_norm() < 1e-15);
    REQUIRE(ho_energy(fx2, hp) == 0.0);

    hp.kappa = -0.1;
    REQUIRE_THROWS_AS(hp.validate(), ConfigError);
}
