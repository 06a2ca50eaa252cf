#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "heomstark/analysis.hpp"
#include "test_common.hpp"

using namespace heomstark;
using analysis::Vec3;
using testutil::density;

namespace {

heom::PropagationConfig cfg(int l_max, double t_final_fs, double stride_fs) {
    heom::PropagationConfig c;
    c.l_max = l_max;
    c.t_final_fs = t_final_fs;
    c.output_stride_fs = stride_fs;
    return c;
}

std::vector<double> grid(double t_end, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

}  // namespace

TEST(Bloch, CoordinatesOfProbeStates) {
    const auto s = analysis::tomography_states();
    const std::array<Vec3, 5> expected{Vec3(0, 0, -1), Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, -1, 0),
                                       Vec3(0, 0, 0)};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_LT((analysis::bloch_coords(s[i]).vec() - expected[i]).norm(), 1e-15) << i;
        EXPECT_NEAR(s[i].trace().real(), 1.0, 1e-15);
    }
}

TEST(Bloch, RoundTrip) {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 20; ++k) {
        const Mat2 rho = testutil::random_pure_state(rng);
        const auto b = analysis::bloch_coords(rho);
        EXPECT_NEAR(b.norm(), 1.0, 1e-12);
        EXPECT_LT(testutil::max_abs(analysis::density_from_bloch(b.vec()) - rho), 1e-14);
    }
}

TEST(Entropy, KnownValues) {
    EXPECT_NEAR(analysis::entropy(density(0.75, 0.0)), 0.8112781244591328, 1e-14);
    EXPECT_NEAR(analysis::entropy(density(0.5, 0.0)), 1.0, 1e-14);
    EXPECT_NEAR(analysis::entropy(density(0.5, 0.5)), 0.0, 1e-7);
    EXPECT_EQ(analysis::entropy(density(1.0, 0.0)), 0.0);
}

TEST(Entropy, RejectsNonPhysicalState) {
    EXPECT_THROW(analysis::entropy(density(1.3, 0.0)), analysis::EntropyError);
    EXPECT_NO_THROW(analysis::entropy(density(1.0 + 1e-9, 0.0)));
}

TEST(Entropy, InvariantUnderAdiabaticRotation) {
    const auto p = SystemParams::heterojunction();
    const Mat2 rho = density(0.8, cplx(0.1, -0.2));
    EXPECT_NEAR(analysis::entropy(analysis::adiabatic_density(rho, p)), analysis::entropy(rho), 1e-13);
}

TEST(Affine, RecoversKnownMap) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    analysis::AffineBlochMap truth;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) truth.linear(r, c) = u(rng) + (r == c ? 0.5 : 0.0);
        truth.translation(r) = 0.3 * u(rng);
    }
    const auto states = analysis::tomography_states();
    std::array<Vec3, 4> in, out;
    for (int j = 0; j < 4; ++j) {
        in[j] = analysis::bloch_coords(states[j]).vec();
        out[j] = truth.apply(in[j]);
    }
    const auto m = analysis::solve_affine(in, out, 3.0);
    EXPECT_LT((m.linear - truth.linear).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((m.translation - truth.translation).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(m.time_fs, 3.0);
    EXPECT_NEAR(analysis::volume(m), truth.linear.determinant(), 1e-14);
}

TEST(Affine, EllipsoidOfScaledRotation) {
    analysis::AffineBlochMap m;
    const double c = std::cos(0.3), s = std::sin(0.3);
    analysis::Mat3 rot;
    rot << c, -s, 0, s, c, 0, 0, 0, 1;
    m.linear = rot * Eigen::Vector3d(0.2, 0.9, 0.5).asDiagonal();
    m.translation = Vec3(0.1, 0.0, -0.2);
    const auto e = analysis::ellipsoid(m);
    EXPECT_NEAR(e.semi_axes(0), 0.9, 1e-14);
    EXPECT_NEAR(e.semi_axes(1), 0.5, 1e-14);
    EXPECT_NEAR(e.semi_axes(2), 0.2, 1e-14);
    EXPECT_NEAR(std::abs(e.axes.col(0).dot(rot.col(1))), 1.0, 1e-14);
    EXPECT_EQ(e.center, m.translation);
    EXPECT_NEAR(analysis::volume(m), 0.09, 1e-15);
}

// ---------------------------------------------------------------------------

TEST(Rate, ExponentialVolumeGivesConstantRate) {
    const double gamma = 2.5e-4;
    const auto t = grid(60.0, 601);
    std::vector<double> v;
    for (double x : t) v.push_back(std::exp(-2.0 * gamma * units::fs_to_au(x)));
    const auto rate = analysis::decoherence_rate(t, v);
    for (double r : rate) EXPECT_NEAR(r, gamma, 1e-6 * gamma);
}

TEST(Rate, UndefinedBelowFloor) {
    const std::vector<double> t{0, 1, 2, 3, 4};
    const std::vector<double> v{1.0, 0.5, 1e-13, 0.2, 0.1};
    const auto rate = analysis::decoherence_rate(t, v);
    EXPECT_FALSE(std::isnan(rate[0]));
    EXPECT_FALSE(std::isnan(rate[1]));
    for (std::size_t i = 2; i < rate.size(); ++i) EXPECT_TRUE(std::isnan(rate[i])) << i;
    EXPECT_THROW(analysis::decoherence_rate({0, 1}, {1.0}), std::invalid_argument);
}

TEST(Rate, IntegratingRateRecoversVolume) {
    const auto t = grid(60.0, 601);
    std::vector<double> v;
    for (double x : t) v.push_back(0.4 + 0.6 * std::exp(-x / 15.0) + 0.05 * std::sin(x / 4.0) * std::exp(-x / 30.0));
    const auto rate = analysis::decoherence_rate(t, v);
    const auto back = analysis::volume_from_rate(t, rate, v[0]);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back[i] / v[i], 1.0, 1e-3) << t[i];
}

TEST(Bumps, MonotoneSeriesHasNone) {
    const auto t = grid(50.0, 501);
    std::vector<double> v;
    for (double x : t) v.push_back(std::exp(-x / 10.0));
    const auto nm = analysis::detect_nonmarkovianity(t, v);
    EXPECT_TRUE(nm.bumps.empty());
    EXPECT_FALSE(nm.non_markovian);
    EXPECT_LE(nm.max_increase, 0.0);
}

TEST(Bumps, TwoRevivalsFoundWithProminence) {
    const auto t = grid(60.0, 601);
    std::vector<double> v;
    for (double x : t) {
        v.push_back(0.5 + 0.5 * std::exp(-x / 5.0) + 0.08 * std::exp(-std::pow((x - 20.0) / 2.0, 2)) +
                    0.04 * std::exp(-std::pow((x - 40.0) / 2.0, 2)));
    }
    // scipy.signal.find_peaks: peaks at 20 and 40 fs, prominences 0.06741172, 0.03964793
    const auto nm = analysis::detect_nonmarkovianity(t, v);
    ASSERT_EQ(nm.bumps.size(), 2u);
    EXPECT_NEAR(nm.bumps[0].t_fs, 20.0, 1e-9);
    EXPECT_NEAR(nm.bumps[1].t_fs, 40.0, 1e-9);
    EXPECT_NEAR(nm.bumps[0].prominence, 0.06741172, 1e-8);
    EXPECT_NEAR(nm.bumps[1].prominence, 0.03964793, 1e-8);
    EXPECT_GT(nm.bumps[0].prominence, nm.bumps[1].prominence);
    EXPECT_TRUE(nm.non_markovian);
    // a high threshold keeps only the larger revival
    EXPECT_EQ(analysis::find_bumps(t, v, nm.bumps[1].prominence * 1.01).size(), 1u);
}

TEST(Bumps, NoiseBelowProminenceIgnored) {
    const auto t = grid(10.0, 101);
    std::vector<double> v;
    for (std::size_t i = 0; i < t.size(); ++i) v.push_back(1.0 - 0.01 * t[i] + (i % 2 ? 2e-3 : 0.0));
    EXPECT_TRUE(analysis::find_bumps(t, v, 0.005).empty());
    EXPECT_TRUE(analysis::detect_nonmarkovianity(t, v).non_markovian);
}

TEST(Bumps, StableUnderGridRefinement) {
    auto series = [](std::size_t n) {
        const auto t = grid(60.0, n);
        std::vector<double> v;
        for (double x : t) v.push_back(0.5 + 0.3 * std::exp(-x / 25.0) * std::cos(x / 3.0));
        return analysis::find_bumps(t, v, 0.005);
    };
    const auto coarse = series(601), fine = series(1201);
    ASSERT_EQ(coarse.size(), fine.size());
    for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_NEAR(coarse[i].t_fs, fine[i].t_fs, 0.1);
}

// ---------------------------------------------------------------------------

TEST(Map, IdentityAtTimeZero) {
    const auto spec = testutil::weak_bath(1);
    const auto exp = bath::decompose_correlation(spec);
    const auto h = heom::build_hierarchy(exp.size(), 2);
    const auto m = analysis::reconstruct_map(cfg(2, 1.0, 0.5), h, exp, SystemParams::heterojunction(), {});
    EXPECT_LT((m.maps[0].linear - analysis::Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(m.maps[0].translation.norm(), 1e-15);
    EXPECT_EQ(m.maps.size(), 3u);
}

TEST(Map, ZeroCouplingIsRotation) {
    auto exp = bath::decompose_correlation(testutil::weak_bath(1));
    for (auto& t : exp.terms) t.alpha = t.alpha_tilde = 0.0;
    const auto h = heom::build_hierarchy(exp.size(), 2);
    const auto p = SystemParams::heterojunction();
    const auto m = analysis::reconstruct_map(cfg(2, 20.0, 0.5), h, exp, p, {});
    const auto vs = analysis::volume_series(m);
    for (std::size_t i = 0; i < m.maps.size(); ++i) {
        const auto& a = m.maps[i].linear;
        EXPECT_LT((a.transpose() * a - analysis::Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_NEAR(vs.volume[i], 1.0, 1e-9);
        EXPECT_NEAR(vs.rate[i], 0.0, 1e-10);
        EXPECT_NEAR(analysis::entropy(m.trajectories[2].rho[i]), 0.0, 1e-4);
    }
    EXPECT_TRUE(m.reliable);
}

TEST(Map, RandomPureStatesStayInBallAndMatchMap) {
    const auto spec = testutil::weak_bath(2, 2e-11);
    const auto exp = bath::decompose_correlation(spec);
    const auto h = heom::build_hierarchy(exp.size(), 4);
    const auto p = SystemParams::heterojunction();
    const auto c = cfg(4, 30.0, 1.0);
    const auto m = analysis::reconstruct_map(c, h, exp, p, {});
    EXPECT_TRUE(m.reliable);
    EXPECT_LT(m.linearity_error, 1e-10);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 6; ++k) {
        const Mat2 rho0 = testutil::random_pure_state(rng);
        const auto tr = heom::propagate(rho0, c, h, exp, p, {});
        const Vec3 r0 = analysis::bloch_coords(rho0).vec();
        for (std::size_t i = 0; i < tr.rho.size(); ++i) {
            const Vec3 r = analysis::bloch_coords(tr.rho[i]).vec();
            EXPECT_LE(r.norm(), 1.0 + 1e-9);
            EXPECT_LT((m.maps[i].apply(r0) - r).norm(), 1e-10);
        }
    }
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Vec3 r0 = analysis::bloch_coords(testutil::random_pure_state(rng)).vec();
        for (const auto& map : m.maps) worst = std::max(worst, map.apply(r0).norm());
    }
    EXPECT_LE(worst, 1.0 + 1e-6);
    const auto vs = analysis::volume_series(m);
    EXPECT_LT(vs.volume.back(), 1.0);
    EXPECT_GT(vs.volume.back(), 0.0);
}
