#include <gtest/gtest.h>

#include <levymp/spectral.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace levymp;

namespace {

StabilityExponent from_rows(std::vector<std::vector<double>> rows, double c = 2.0) {
    std::vector<std::vector<ExactNumber>> ex;
    for (auto& r : rows) {
        ex.emplace_back();
        for (double v : r) ex.back().push_back(exact_from_double(v));
    }
    return make_exponent(ex, c);
}

StabilityExponent from_matrix(const Eigen::MatrixXd& m) {
    StabilityExponent e;
    e.matrix = m;
    return e;
}

}  // namespace

TEST(Spectral, DiagonalPlanar) {
    auto p = classify_exponent(from_rows({{0.5, 0}, {0, 0.8}}));
    EXPECT_EQ(p.case_label, CaseLabel::A1_diag);
    ASSERT_EQ(p.alphas.size(), 2u);
    EXPECT_NEAR(p.alphas[0], 2.0, 1e-12);
    EXPECT_NEAR(p.alphas[1], 1.25, 1e-12);
    ASSERT_TRUE(p.exact_alphas);
    EXPECT_EQ((*p.exact_alphas)[0], Rational(2));
    EXPECT_EQ((*p.exact_alphas)[1], Rational(5, 4));
    EXPECT_TRUE(p.nilpotent_block_sizes.empty());
}

TEST(Spectral, RotationCase) {
    auto p = classify_exponent(from_rows({{0.6, -1.0}, {1.0, 0.6}}));
    EXPECT_EQ(p.case_label, CaseLabel::A1_rot);
    EXPECT_NEAR(p.alphas[0], 5.0 / 3.0, 1e-12);
    EXPECT_NEAR(p.alphas[1], 5.0 / 3.0, 1e-12);
    ASSERT_TRUE(p.rotation_b);
    EXPECT_NEAR(std::abs(*p.rotation_b), 1.0, 1e-12);
    ASSERT_TRUE(p.exact_alphas);
    EXPECT_EQ((*p.exact_alphas)[0], Rational(5, 3));
}

TEST(Spectral, JordanBlockPlanar) {
    auto p = classify_exponent(from_rows({{0.75, 0}, {1.0, 0.75}}));
    EXPECT_EQ(p.case_label, CaseLabel::A2);
    EXPECT_EQ(p.nilpotent_block_sizes, std::vector<int>{2});
    ASSERT_TRUE(p.exact_alphas);
    EXPECT_EQ((*p.exact_alphas)[0], Rational(4, 3));
    EXPECT_EQ((*p.exact_alphas)[1], Rational(4, 3));
}

TEST(Spectral, SpatialCases) {
    auto b1 = classify_exponent(from_rows({{0.5, 0, 0}, {0, 0.6, 0}, {0, 0, 0.7}}));
    EXPECT_EQ(b1.case_label, CaseLabel::B1);
    auto b2 = classify_exponent(from_rows({{0.6, 0, 0}, {1, 0.6, 0}, {0, 0, 0.8}}));
    EXPECT_EQ(b2.case_label, CaseLabel::B2);
    EXPECT_EQ(b2.nilpotent_block_sizes, std::vector<int>{2});
    auto b3 = classify_exponent(from_rows({{0.7, 0, 0}, {1, 0.7, 0}, {0, 1, 0.7}}));
    EXPECT_EQ(b3.case_label, CaseLabel::B3);
    EXPECT_EQ(b3.nilpotent_block_sizes, std::vector<int>{3});
    EXPECT_NEAR(b3.alphas[0], 1.0 / 0.7, 1e-12);
    // equal real parts but diagonalizable stays B1
    auto b1e = classify_exponent(from_rows({{0.6, 0, 0}, {0, 0.6, 0}, {0, 0, 0.6}}));
    EXPECT_EQ(b1e.case_label, CaseLabel::B1);
    EXPECT_EQ(b1e.multiplicities, std::vector<int>{3});
}

TEST(Spectral, OneDimensional) {
    auto p = classify_exponent(from_rows({{0.8}}));
    EXPECT_EQ(p.case_label, CaseLabel::D1);
    EXPECT_NEAR(p.alphas[0], 1.25, 1e-12);
}

TEST(Spectral, AlphasAreDescendingAndRealPartsAscending) {
    auto p = classify_exponent(from_rows({{0.9, 0, 0}, {0, 0.5, 0}, {0, 0, 0.7}}));
    EXPECT_TRUE(std::is_sorted(p.alphas.rbegin(), p.alphas.rend()));
    EXPECT_TRUE(std::is_sorted(p.real_parts.begin(), p.real_parts.end()));
}

TEST(Spectral, RejectsSpectrumOutsideRange) {
    EXPECT_THROW(classify_exponent(from_rows({{0.4, 0}, {0, 0.6}})), NonFullSpectrum);
    EXPECT_THROW(classify_exponent(from_rows({{-0.5, 0}, {0, 0.6}})), NonFullSpectrum);
    EXPECT_THROW(classify_exponent(from_rows({{0.5, 0}, {0, 0}})), NonFullSpectrum);
}

TEST(Spectral, AmbiguousNearDefectiveMatrix) {
    // eigenvalues 0.75 +- 1.3e-4: too close to call diagonalizable, too far for a Jordan block
    EXPECT_THROW(classify_exponent(from_rows({{0.75, 0}, {1.0, 0.75026}})), AmbiguousJordan);
    // well separated: two distinct alphas
    auto p = classify_exponent(from_rows({{0.75, 0}, {1.0, 0.85}}));
    EXPECT_EQ(p.case_label, CaseLabel::A1_diag);
}

TEST(Spectral, ValidationErrors) {
    StabilityExponent e;
    e.matrix = Eigen::MatrixXd::Identity(4, 4) * 0.6;
    EXPECT_THROW(e.validate(), DomainError);
    e.matrix = Eigen::MatrixXd::Identity(2, 2) * 0.6;
    e.scale_c = 1.0;
    EXPECT_THROW(e.validate(), DomainError);
    EXPECT_THROW(from_rows({{0.5, 0}, {0}}), DomainError);
}

TEST(Spectral, ProfileFromAlphasLabels) {
    auto p = profile_from_alphas({parse_exact("4/3"), parse_exact("4/3")}, CaseLabel::A2);
    EXPECT_EQ(p.case_label, CaseLabel::A2);
    EXPECT_EQ((*p.exact_alphas)[0], Rational(4, 3));
    EXPECT_THROW(profile_from_alphas({1.5, 1.2}, CaseLabel::A2), DomainError);
    EXPECT_THROW(profile_from_alphas({1.5, 1.2, 1.1}, CaseLabel::B3), DomainError);
    EXPECT_THROW(profile_from_alphas({2.5, 1.2}), NonFullSpectrum);
    auto d = profile_from_alphas({1.2, 1.8});
    EXPECT_EQ(d.case_label, CaseLabel::A1_diag);
    EXPECT_DOUBLE_EQ(d.alphas[0], 1.8);
    EXPECT_EQ(to_string(CaseLabel::B2), "B2");
    EXPECT_EQ(case_label_from_string("A1_rot"), CaseLabel::A1_rot);
    EXPECT_THROW(case_label_from_string("Z9"), DomainError);
}

// Similar matrices get the same profile.
TEST(Spectral, SimilarityInvariance) {
    std::vector<Eigen::MatrixXd> templates;
    auto mk = [](std::initializer_list<std::initializer_list<double>> rows) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        Eigen::Index i = 0;
        for (auto r : rows) {
            Eigen::Index j = 0;
            for (double v : r) m(i, j++) = v;
            ++i;
        }
        return m;
    };
    templates.push_back(mk({{0.5, 0}, {0, 0.8}}));
    templates.push_back(mk({{0.6, -1}, {1, 0.6}}));
    templates.push_back(mk({{0.75, 0}, {1, 0.75}}));
    templates.push_back(mk({{0.5, 0, 0}, {0, 0.6, 0}, {0, 0, 0.7}}));
    templates.push_back(mk({{0.6, 0, 0}, {1, 0.6, 0}, {0, 0, 0.8}}));
    templates.push_back(mk({{0.7, 0, 0}, {1, 0.7, 0}, {0, 1, 0.7}}));
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (const auto& d : templates) {
        auto ref = classify_exponent(from_matrix(d));
        const auto n = d.rows();
        int done = 0;
        while (done < 20) {
            Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) p(i, j) += u(gen);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(p);
            double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
            if (!(cond < 10.0)) continue;
            ++done;
            auto got = classify_exponent(from_matrix(p * d * p.inverse()));
            EXPECT_EQ(got.case_label, ref.case_label);
            EXPECT_EQ(got.nilpotent_block_sizes, ref.nilpotent_block_sizes);
            ASSERT_EQ(got.alphas.size(), ref.alphas.size());
            for (std::size_t i = 0; i < got.alphas.size(); ++i) EXPECT_NEAR(got.alphas[i], ref.alphas[i], 1e-6);
        }
    }
}

TEST(Spectral, MatrixPowerClosedForms) {
    const double t = 3.7, lt = std::log(t);
    auto diag = from_rows({{0.5, 0}, {0, 0.8}});
    Eigen::MatrixXd m = matrix_power_cB(diag, t);
    EXPECT_NEAR(m(0, 0), std::pow(t, 0.5), 1e-13);
    EXPECT_NEAR(m(1, 1), std::pow(t, 0.8), 1e-13);
    EXPECT_NEAR(m(0, 1), 0.0, 1e-14);

    auto jordan = from_rows({{0.75, 0}, {1, 0.75}});
    m = matrix_power_cB(jordan, t);
    EXPECT_NEAR(m(0, 0), std::pow(t, 0.75), 1e-13);
    EXPECT_NEAR(m(1, 0), std::pow(t, 0.75) * lt, 1e-12);
    EXPECT_NEAR(m(0, 1), 0.0, 1e-14);

    auto rot = from_rows({{0.6, -1}, {1, 0.6}});
    m = matrix_power_cB(rot, t);
    const double s = std::pow(t, 0.6);
    EXPECT_NEAR(m(0, 0), s * std::cos(lt), 1e-12);
    EXPECT_NEAR(m(1, 0), s * std::sin(lt), 1e-12);
    EXPECT_NEAR(m(0, 1), -s * std::sin(lt), 1e-12);

    EXPECT_NEAR((matrix_power_cB(rot, 1.0) - Eigen::MatrixXd::Identity(2, 2)).norm(), 0.0, 1e-15);
    EXPECT_THROW(matrix_power_cB(rot, 0.0), DomainError);
}

TEST(Spectral, MatrixPowerSemigroup) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ut(0.1, 10.0), ub(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + trial % 3;
        StabilityExponent e;
        e.matrix = Eigen::MatrixXd::Identity(d, d) * 0.7;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) e.matrix(i, j) += 0.3 * ub(gen);
        double s = ut(gen), t = ut(gen);
        Eigen::MatrixXd lhs = matrix_power_cB(e, s * t);
        Eigen::MatrixXd rhs = matrix_power_cB(e, s) * matrix_power_cB(e, t);
        EXPECT_LE((lhs - rhs).norm(), 1e-10 * std::max(1.0, lhs.norm())) << "trial " << trial;
    }
}

TEST(Spectral, ExpmMatchesSeries) {
    Eigen::MatrixXd a(3, 3);
    a << 0.1, 2.0, -0.5, 0.3, -1.0, 0.2, 0.0, 0.4, 0.5;
    Eigen::MatrixXd series = Eigen::MatrixXd::Identity(3, 3), term = series;
    for (int j = 1; j < 60; ++j) {
        term = term * a / j;
        series += term;
    }
    EXPECT_LE((expm(a) - series).norm(), 1e-12 * series.norm());
}
