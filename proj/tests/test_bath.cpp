// Reference values for the heterojunction density (Gamma read as x1e-4, 300 K)
// were computed independently by direct integration of the fluctuation-dissipation
// integral and the lineshape function (mpmath at 30 digits; the 60 fs correlation
// with scipy on a 2000-panel grid, where tanh-sinh struggled with the oscillation).

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "heomstark/bath.hpp"
#include "test_common.hpp"

using namespace heomstark;

namespace {
const bath::BathSpec kDefault{};
}

TEST(SpectralDensity, ReferenceValues) {
    const auto& set = kDefault.lorentzians;
    EXPECT_EQ(bath::spectral_density(0.0, set), 0.0);
    EXPECT_NEAR(bath::spectral_density(0.001, set), 9.2891587088835614e-4, 1e-17);
    EXPECT_NEAR(bath::spectral_density(0.00699, set), 0.038929773875148737, 1e-15);
    EXPECT_NEAR(bath::spectral_density(0.024, set), 3.5154884856032888e-5, 1e-18);
}

TEST(SpectralDensity, PositiveOddAndConsistent) {
    const auto& set = kDefault.lorentzians;
    for (double w = 1e-4; w < 0.1; w *= 1.3) {
        EXPECT_GT(bath::spectral_density(w, set), 0.0);
        EXPECT_NEAR(bath::spectral_density(-w, set), -bath::spectral_density(w, set), 1e-18);
        EXPECT_NEAR(bath::spectral_density_over_omega(w, set) * w, bath::spectral_density(w, set), 1e-16);
        EXPECT_NEAR(std::abs(bath::spectral_density(cplx(w, 0.0), set) - bath::spectral_density(w, set)), 0.0, 1e-16);
    }
}

TEST(SpectralDensity, PeakLocation) {
    // scipy Brent on the same closed form: 0.0069892023
    EXPECT_NEAR(bath::spectral_peak(kDefault.lorentzians), 0.0069892023, 1e-8);
}

TEST(SpectralDensity, PrintedExponentReading) {
    const auto set = bath::LorentzianSet::heterojunction(bath::GammaReading::as_printed_1e4);
    EXPECT_LT(bath::spectral_density(0.007, set), 1e-20);
}

TEST(SpectralDensity, ValidationRejectsNonPositive) {
    bath::LorentzianSet bad{{{1e-12, 0.005, 0.0}}};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    EXPECT_THROW(bath::LorentzianSet{}.validate(), std::invalid_argument);
}

TEST(Quadrature, ReferenceCorrelationValues) {
    bath::CorrelationQuadrature q(kDefault);
    const double c0 = 2.7375300e-5;
    EXPECT_NEAR(q.c0(), c0, 1e-6 * c0);
    struct Ref {
        double t_fs, re, im;
    };
    for (const auto& r : {Ref{10, -1.59798501915931e-5, -8.3770264617229e-6},
                          Ref{30, -9.24376223862006e-6, -6.46155897260655e-6},
                          Ref{60, 3.472264454499712e-7, 4.926273246309863e-6}}) {
        const cplx c = q(units::fs_to_au(r.t_fs));
        EXPECT_NEAR(c.real(), r.re, 1e-6 * c0) << r.t_fs;
        EXPECT_NEAR(c.imag(), r.im, 1e-6 * c0) << r.t_fs;
    }
}

TEST(Quadrature, LineshapeReferenceValues) {
    bath::CorrelationQuadrature q(kDefault);
    EXPECT_EQ(q.lineshape(0.0), 0.0);
    EXPECT_NEAR(q.lineshape(units::fs_to_au(2)), 0.0909207281151486, 1e-9);
    EXPECT_NEAR(q.lineshape(units::fs_to_au(5)), 0.496022052124838, 1e-8);
    EXPECT_NEAR(q.lineshape(units::fs_to_au(10)), 1.26958664410577, 1e-8);
}

TEST(Quadrature, LineshapeIsDoubleIntegralOfReC) {
    // g'' = Re C; second difference of g against the quadrature C
    bath::CorrelationQuadrature q(kDefault);
    const double h = 4.0;
    auto g = [&](double t) { return q.lineshape(t); };
    for (double t : {50.0, 400.0, 1500.0}) {
        const double g2 =
            (-g(t + 2 * h) + 16 * g(t + h) - 30 * g(t) + 16 * g(t - h) - g(t - 2 * h)) / (12 * h * h);
        EXPECT_NEAR(g2, q(t).real(), 1e-5 * q.c0()) << t;
    }
}

TEST(Decomposition, TermCountAndOrder) {
    for (int n : {0, 1, 4}) {
        auto spec = kDefault;
        spec.n_matsubara = n;
        const auto e = bath::decompose_correlation(spec);
        EXPECT_EQ(e.size(), 10u + n);
        EXPECT_EQ(e.n_matsubara, n);
        for (std::size_t k = 0; k < 10; k += 2) {
            EXPECT_NEAR(e.terms[k].zeta.real(), -e.terms[k + 1].zeta.real(), 1e-18);
            EXPECT_GT(e.terms[k].zeta.imag(), 0.0);
        }
        for (int m = 1; m <= n; ++m) {
            const auto& t = e.terms[9 + m];
            EXPECT_NEAR(t.zeta.imag(), bath::matsubara_frequency(m, spec.beta()), 1e-16);
            EXPECT_EQ(t.alpha.imag(), 0.0);
            EXPECT_LT(t.alpha.real(), 0.0);
        }
    }
}

TEST(Decomposition, ConjugateSeriesIsConjugate) {
    const auto e = bath::decompose_correlation(kDefault);
    for (double t : {0.0, 100.0, 1234.5, 4000.0}) {
        EXPECT_LT(std::abs(e.conj_value(t) - std::conj(e.value(t))), 1e-14 * std::abs(e.value(0.0)));
    }
}

TEST(Decomposition, ImaginaryPartIsTemperatureIndependent) {
    auto hot = kDefault;
    hot.temperature = 900.0;
    const auto a = bath::decompose_correlation(kDefault);
    const auto b = bath::decompose_correlation(hot);
    for (double t : {50.0, 700.0, 2500.0}) {
        EXPECT_NEAR(a.value(t).imag(), b.value(t).imag(), 1e-12 * std::abs(a.value(0.0)));
    }
}

TEST(Decomposition, MatsubaraTermsImproveAgreement) {
    const auto times = bath::time_grid_au(100.0, 101);
    const auto numeric = bath::sample_numeric(kDefault, times);
    double previous = 1e300;
    for (int n : {0, 2, 4, 8, 16}) {
        auto spec = kDefault;
        spec.n_matsubara = n;
        const double err = bath::compare_expansion(bath::decompose_correlation(spec), times, numeric).max_rel_error;
        EXPECT_LT(err, previous) << n;
        previous = err;
    }
}

TEST(Decomposition, AutoModeMeetsTarget) {
    const auto a = bath::decompose_correlation_auto(kDefault, 1e-3);
    EXPECT_LE(a.max_rel_error, 1e-3);
    EXPECT_EQ(a.n_matsubara, 8);
    EXPECT_EQ(a.expansion.size(), 18u);
    // the default of four Matsubara terms sits above the target
    const auto times = bath::time_grid_au(100.0, 201);
    const auto four = bath::compare_expansion(bath::decompose_correlation(kDefault), times,
                                              bath::sample_numeric(kDefault, times));
    EXPECT_GT(four.max_rel_error, 1e-3);
}

TEST(Decomposition, MatsubaraPoleCollisionRejected) {
    auto spec = kDefault;
    const double nu1 = bath::matsubara_frequency(1, spec.beta());
    spec.lorentzians.terms.push_back({1e-12, 0.005, nu1});
    EXPECT_THROW(bath::decompose_correlation(spec), std::invalid_argument);
}

TEST(Decomposition, RejectsBadSpec) {
    auto spec = kDefault;
    spec.temperature = 0.0;
    EXPECT_THROW(bath::decompose_correlation(spec), std::invalid_argument);
    spec = kDefault;
    spec.n_matsubara = -1;
    EXPECT_THROW(bath::decompose_correlation(spec), std::invalid_argument);
}

TEST(PureDephasing, CoherenceFormula) {
    const double delta = 0.0095;
    bath::PureDephasing pd(kDefault, delta);
    const double t = units::fs_to_au(5.0);
    const cplx c = pd.coherence(t, 0.5);
    EXPECT_NEAR(std::abs(c), 0.5 * std::exp(-4.0 * 0.496022052124838), 1e-9);
    EXPECT_NEAR(std::arg(c), std::remainder(-2.0 * delta * t, 2.0 * std::numbers::pi), 1e-12);
}
