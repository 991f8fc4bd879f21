// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "fixtures.hpp"
#include "mssteer/potentials.hpp"

using namespace mssteer;

namespace {

// 30-atom two-chain structure with all pairwise distances >= 1 A.
fixtures::Structure random_structure(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> box(-8.0, 8.0);
    std::vector<Vec3> pts;
    while (pts.size() < 30) {
        const Vec3 p{box(rng), box(rng), box(rng)};
        bool ok = true;
        for (const Vec3& q : pts)
            if (distance(p, q) < 1.0) {
                ok = false;
                break;
            }
        if (ok) pts.push_back(p);
    }
    fixtures::Structure s;
    s.chains = {fixtures::make_ca_chain("A", {pts.begin(), pts.begin() + 15}),
                fixtures::make_ca_chain("B", {pts.begin() + 15, pts.end()})};
    return s;
}

using EnergyFn = std::function<EnergyReport(const Structure&)>;

// Central finite differences against the analytic gradient, tolerance
// max(1e-5 * |g|, 1e-8) per coordinate.
void check_gradient(const Structure& s, const EnergyFn& fn) {
    const EnergyReport base = fn(s);
    std::vector<Vec3> coords = s.coordinates();
    REQUIRE(base.gradient.size() == coords.size());
    const double h = 1e-4;
    for (std::size_t a = 0; a < coords.size(); ++a) {
        for (int c = 0; c < 3; ++c) {
            auto bump = [&](double delta) {
                std::vector<Vec3> moved = coords;
                double* v = c == 0 ? &moved[a].x : c == 1 ? &moved[a].y : &moved[a].z;
                *v += delta;
                return fn(s.with_coordinates(moved)).total_energy;
            };
            const double fd = (bump(h) - bump(-h)) / (2.0 * h);
            const double an =
                c == 0 ? base.gradient[a].x : c == 1 ? base.gradient[a].y : base.gradient[a].z;
            const double tol = std::max(1e-5 * std::abs(an), 1e-8);
            CHECK(std::abs(fd - an) <= tol);
        }
    }
}

ResidueRef ref_a(int seq) { return ResidueRef{"A", seq}; }
ResidueRef ref_b(int seq) { return ResidueRef{"B", seq}; }

}  // namespace

TEST_CASE("flat-bottom distance energy: exact values on the 40 A fixture") {
    const Structure s = fixtures::single_basin();  // matched pairs exactly 40 A apart

    SUBCASE("satisfied upper bound has zero energy and zero gradient") {
        const EnergyReport r = u_dist(s, {XlPositive{ref_a(5), ref_b(5), 0.0, 45.0}});
        CHECK(r.total_energy == 0.0);
        for (const Vec3& g : r.gradient) CHECK(norm(g) == 0.0);
    }
    SUBCASE("10 A violation costs exactly 100") {
        const EnergyReport r = u_dist(s, {XlPositive{ref_a(5), ref_b(5), 0.0, 30.0}});
        CHECK(r.total_energy == doctest::Approx(100.0).epsilon(1e-12));
        REQUIRE(r.per_constraint_energy.size() == 1);
        CHECK(r.per_constraint_energy[0] == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("below-d_min side is quadratic too") {
        const EnergyReport r = u_dist(s, {XlPositive{ref_a(5), ref_b(5), 41.0, 50.0}});
        CHECK(r.total_energy == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("lower bound: satisfied at 40 for d_min 30, violated for d_min 45") {
        CHECK(u_neg(s, {XlNegative{ref_a(5), ref_b(5), 30.0}}).total_energy == 0.0);
        const EnergyReport r = u_neg(s, {XlNegative{ref_a(5), ref_b(5), 45.0}});
        CHECK(r.total_energy == doctest::Approx(25.0).epsilon(1e-12));
    }
}

TEST_CASE("protection-scaled contact bound") {
    PotentialParams params;
    CHECK(hdx_dmax(0.0, params) == 8.0);
    CHECK(hdx_dmax(1.0, params) == 4.0);  // 8 * (1 - 1 * 0.5)
    CHECK(hdx_dmax(0.5, params) == 6.0);
    PotentialParams tight = params;
    tight.d_base = 3.0;
    CHECK(hdx_dmax(1.0, tight) == 3.0);  // floor at 3 A
}

TEST_CASE("gaussian burial and pseudo-sasa frozen values") {
    // two CAs exactly 5 A apart, sigma 5: burial = exp(-25/50)
    fixtures::Structure s;
    s.chains = {fixtures::make_ca_chain("A", {Vec3{0, 0, 0}, Vec3{5, 0, 0}})};
    CHECK(burial(s, ref_a(1), 5.0) == doctest::Approx(0.606530659712633).epsilon(1e-12));
    CHECK(pseudo_sasa(5.0, 5.0) == doctest::Approx(0.367879441171442).epsilon(1e-12));
    CHECK(pseudo_sasa(0.0, 5.0) == 1.0);  // isolated residue is fully exposed
}

TEST_CASE("contact proxy: satisfied at a real interface, violated across a gap") {
    PotentialParams params;
    const Structure contact = fixtures::contact_complex();
    const EnergyReport ok =
        hdx_proxy_potential(contact, {HdxProxy{ref_a(4), "B", 0.4}}, params);
    CHECK(ok.total_energy == 0.0);
    for (const Vec3& g : ok.gradient) CHECK(norm(g) == 0.0);
    CHECK(ok.softmin_slack == doctest::Approx(std::log(8.0) / params.softmin_beta));

    const Structure apart = fixtures::single_basin();
    const EnergyReport bad =
        hdx_proxy_potential(apart, {HdxProxy{ref_a(5), "B", 0.4}}, params);
    CHECK(bad.total_energy > 0.0);
    double grad_norm = 0.0;
    for (const Vec3& g : bad.gradient) grad_norm += norm_sq(g);
    CHECK(grad_norm > 0.0);
}

TEST_CASE("softmin slack bound holds against the hard minimum") {
    // the softened minimum may undershoot the hard minimum by at most ln(n)/beta
    const Structure apart = fixtures::single_basin();
    PotentialParams params;
    const EnergyReport r = hdx_proxy_potential(apart, {HdxProxy{ref_a(5), "B", 1.0}}, params);
    double hard_min = 1e300;
    const StructureIndex idx(apart);
    const auto coords = apart.coordinates();
    const int subject = idx.ca_flat_index(ref_a(5));
    for (const auto& entry : idx.ca_entries_of_chain("B"))
        hard_min = std::min(hard_min, distance(coords[static_cast<std::size_t>(subject)],
                                               coords[static_cast<std::size_t>(entry.atom_index)]));
    const double d_max = hdx_dmax(1.0, params);
    // energy computed from a softmin within [hard_min - slack, hard_min]
    const double lo = (hard_min - r.softmin_slack - d_max) * (hard_min - r.softmin_slack - d_max);
    const double hi = (hard_min - d_max) * (hard_min - d_max);
    CHECK(r.total_energy >= lo - 1e-9);
    CHECK(r.total_energy <= hi + 1e-9);
}

TEST_CASE("burial loss: exposed subject is penalized, tau gives a true zero") {
    PotentialParams params;
    const Structure apart = fixtures::single_basin();
    const EnergyReport r = burial_loss(apart, {HdxBurial{ref_a(1), 0.8}}, params);
    CHECK(r.total_energy > 0.0);

    // pseudo-SASA of a fully isolated residue is 1; with tau = 1 the loss
    // vanishes exactly and so does the gradient.
    fixtures::Structure lone;
    lone.chains = {fixtures::make_ca_chain("A", {Vec3{0, 0, 0}})};
    PotentialParams relaxed = params;
    relaxed.tau = 1.0;
    const EnergyReport zero = burial_loss(lone, {HdxBurial{ref_a(1), 1.0}}, relaxed);
    CHECK(zero.total_energy == 0.0);
    for (const Vec3& g : zero.gradient) CHECK(norm(g) == 0.0);
}

TEST_CASE("total potential: per-constraint energies keep input order across families") {
    const Structure s = fixtures::single_basin();
    PotentialParams params;
    FamilyWeights weights;

    ConstraintSet set;
    set.items.push_back(HdxBurial{ref_a(1), 0.5});
    set.items.push_back(XlPositive{ref_a(5), ref_b(5), 0.0, 30.0});
    set.items.push_back(HdxProxy{ref_a(5), "B", 0.4});
    set.items.push_back(XlNegative{ref_a(1), ref_b(1), 45.0});

    const EnergyReport all = total_potential(s, set, params, weights);
    REQUIRE(all.per_constraint_energy.size() == 4);
    CHECK(all.per_constraint_energy[1] == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(all.per_constraint_energy[3] == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(all.per_constraint_energy[0] ==
          doctest::Approx(burial_loss(s, {HdxBurial{ref_a(1), 0.5}}, params).total_energy));
    CHECK(all.per_constraint_energy[2] ==
          doctest::Approx(
              hdx_proxy_potential(s, {HdxProxy{ref_a(5), "B", 0.4}}, params).total_energy));
}

TEST_CASE("family weights scale energies and gradients linearly") {
    const Structure s = fixtures::single_basin();
    PotentialParams params;
    ConstraintSet set;
    set.items.push_back(XlPositive{ref_a(5), ref_b(5), 0.0, 30.0});
    set.items.push_back(HdxBurial{ref_a(1), 0.5});

    FamilyWeights unit;
    FamilyWeights scaled;
    scaled.xl_pos = 2.0;
    scaled.hdx_burial = 0.0;

    const EnergyReport a = total_potential(s, set, params, unit);
    const EnergyReport b = total_potential(s, set, params, scaled);
    const double burial_e = burial_loss(s, {HdxBurial{ref_a(1), 0.5}}, params).total_energy;
    CHECK(b.total_energy == doctest::Approx(2.0 * 100.0).epsilon(1e-12));
    CHECK(a.total_energy == doctest::Approx(100.0 + burial_e).epsilon(1e-12));
}

TEST_CASE("compiled constraints surface resolution problems before sampling") {
    const Structure s = fixtures::single_basin();
    const StructureIndex idx(s);

    ConstraintSet missing;
    missing.items.push_back(XlPositive{ref_a(99), ref_b(5), 0.0, 30.0});
    CHECK_THROWS_AS(CompiledConstraints(idx, missing), resolution_error);

    ConstraintSet no_partner;
    no_partner.items.push_back(HdxProxy{ref_a(5), "Z", 0.4});
    CHECK_THROWS_AS(CompiledConstraints(idx, no_partner), resolution_error);
}

TEST_CASE("potential params validation") {
    PotentialParams bad;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = PotentialParams{};
    bad.burial_ref = -1.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = PotentialParams{};
    bad.tau = 1.5;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = PotentialParams{};
    bad.d_base = 2.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = PotentialParams{};
    bad.softmin_beta = 0.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = PotentialParams{};
    bad.k = -1.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    CHECK_NOTHROW(PotentialParams{}.validate());

    FamilyWeights w;
    w.xl_pos = -0.5;
    CHECK_THROWS_AS(w.validate(), config_error);
}

TEST_CASE("analytic gradients match finite differences on random configurations") {
    // 100 random 30-atom configurations per potential; bounds are placed at
    // least 1 A away from the current distance so the finite-difference
    // stencil never straddles a flat-bottom kink.
    std::mt19937_64 rng(0xC0FFEE);
    std::uniform_real_distribution<double> margin(1.0, 4.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> seq(1, 15);
    PotentialParams params;
    FamilyWeights weights;
    weights.xl_neg = 0.7;
    weights.hdx_proxy = 1.3;

    const auto start = std::chrono::steady_clock::now();
    for (int config = 0; config < 100; ++config) {
        const Structure s = random_structure(rng);

        std::vector<XlPositive> pos;
        std::vector<XlNegative> neg;
        for (int k = 0; k < 3; ++k) {
            // alternate violated and satisfied placements
            const ResidueRef a = ref_a(seq(rng)), b = ref_b(seq(rng));
            const double d = ca_distance(s, a, b);
            const double dmax = k % 2 == 0 ? std::max(0.5, d - margin(rng)) : d + margin(rng);
            pos.push_back(XlPositive{a, b, 0.0, dmax});

            const ResidueRef na = ref_a(seq(rng)), nb = ref_b(seq(rng));
            const double nd = ca_distance(s, na, nb);
            const double dmin = k % 2 == 0 ? nd + margin(rng) : std::max(0.1, nd - margin(rng));
            neg.push_back(XlNegative{na, nb, dmin});
        }

        std::vector<HdxProxy> proxies = {HdxProxy{ref_a(seq(rng)), "B", unit(rng)},
                                         HdxProxy{ref_b(seq(rng)), "A", unit(rng)}};
        std::vector<HdxBurial> burials = {HdxBurial{ref_a(seq(rng)), unit(rng)},
                                          HdxBurial{ref_b(seq(rng)), unit(rng)}};

        check_gradient(s, [&](const Structure& m) { return u_dist(m, pos); });
        check_gradient(s, [&](const Structure& m) { return u_neg(m, neg); });
        check_gradient(s,
                       [&](const Structure& m) { return hdx_proxy_potential(m, proxies, params); });
        check_gradient(s, [&](const Structure& m) { return burial_loss(m, burials, params); });

        ConstraintSet set;
        for (const auto& c : pos) set.items.push_back(c);
        for (const auto& c : neg) set.items.push_back(c);
        for (const auto& c : proxies) set.items.push_back(c);
        for (const auto& c : burials) set.items.push_back(c);
        check_gradient(s,
                       [&](const Structure& m) { return total_potential(m, set, params, weights); });
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 30.0);
}
