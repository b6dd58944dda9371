#include <catch2/catch_amalgamated.hpp>

#include "distilkit/criteria.hpp"
#include "distilkit/families.hpp"
#include "distilkit/rng.hpp"

using namespace distilkit;

TEST_CASE("is_ppt") {
    Rng rng(31);
    DenseOperator a = random_density(3, 1, rng);
    DenseOperator b = random_density(1, 3, rng);
    Matrix prod = kron(a.mat, b.mat);
    REQUIRE(is_ppt(DenseOperator(3, 3, prod, true)));
    REQUIRE_FALSE(is_ppt(dense(werner(3, -0.5))));
    REQUIRE(is_ppt(dense(werner(3, -0.2))));
}

TEST_CASE("sr2_expectation on werner states") {
    // psi = (|00> + |11>)/sqrt(2): <psi|rho_W^{T_B}|psi> proportional to 1 + 2 beta
    for (double beta : {-0.8, -0.5, -0.2, 0.3}) {
        const int d = 3;
        Vector v = Vector::Zero(d * d);
        v[0] = v[d + 1] = 1 / std::sqrt(2.0);
        PureVector psi(d, d, v);
        double val = sr2_expectation(psi, dense(werner(d, beta)));
        double expect = (1 + 2 * beta) / (d * d + beta * d);
        REQUIRE(val == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("sr2_expectation rejects higher Schmidt rank") {
    Vector v = Vector::Zero(9);
    v[0] = v[4] = v[8] = 1 / std::sqrt(3.0);
    REQUIRE_THROWS_AS(sr2_expectation(PureVector(3, 3, v), dense(werner(3, -0.5))),
                      std::invalid_argument);
}

TEST_CASE("sr2_expectation of psi_B tracks the epsilon boundary") {
    const int d = 3;
    PureVector psi = canonical_abc('B', d);
    for (double eps : {-0.3, -1.0 / 6, -0.1, 0.1}) {
        double val = sr2_expectation(psi, structured(uuvvf(d, eps, 0.2)));
        double margin = eps - (1.0 / d - 0.5);
        if (std::abs(margin) < 1e-12) {
            REQUIRE(std::abs(val) < 1e-10);
        } else {
            REQUIRE((val < 0) == (margin < 0));
        }
    }
}

TEST_CASE("sr2_expectation structured and dense paths agree") {
    const int d = 3;
    FamilyState s = uuvvf(d, -0.2, 0.1);
    for (char kind : {'A', 'B', 'C'}) {
        PureVector psi = canonical_abc(kind, d);
        REQUIRE(sr2_expectation(psi, structured(s)) ==
                Catch::Approx(sr2_expectation(psi, dense(s))).margin(1e-12));
    }
}

TEST_CASE("sr2_expectation is nonnegative on PPT states") {
    Rng rng(32);
    DenseOperator rho = dense(werner(3, -0.2));
    for (int rep = 0; rep < 20; ++rep) {
        // random Schmidt-rank-2 vector
        Matrix u = haar_unitary(3, rng), w = haar_unitary(3, rng);
        Vector v = Vector::Zero(9);
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    v[i * 3 + j] += 0.5 * u(i, k) * w(j, k);
        v /= v.norm();
        REQUIRE(sr2_expectation(PureVector(3, 3, v), rho) >= -1e-10);
    }
}

TEST_CASE("uuvvf_region examples") {
    REQUIRE(uuvvf_region(3, -0.3, 0.2).label == RegionLabel::OneDistillable);
    REQUIRE(uuvvf_region(3, -0.02, 0.0).label ==
            RegionLabel::ProvablyOneUndistillable);
    REQUIRE(uuvvf_region(3, 0.01, 0.01).label == RegionLabel::Separable);
    REQUIRE_THROWS_AS(uuvvf_region(3, -2.0, -2.0), std::invalid_argument);
}

TEST_CASE("uuvvf_region certificates justify d=3 grid labels") {
    const int d = 3;
    int n_onedist = 0, n_sep = 0;
    for (int ie = -10; ie <= 10; ++ie)
        for (int id = -10; id <= 10; ++id) {
            const double eps = ie * 0.05, delta = id * 0.05;
            auto iq = uuvvf_inequalities(d, eps, delta);
            if (iq[0] < -1e-12 || iq[1] < -1e-12 || iq[2] < -1e-12) continue;
            RegionVerdict v = uuvvf_region(d, eps, delta);
            // closed forms at d=3: 2+15e+18d, e+1/6, d+7/18
            const double a = 2 + 15 * eps + 18 * delta;
            const double b = eps + 1.0 / 6;
            const double c = delta + 7.0 / 18;
            bool one = a < -1e-12 || b < -1e-12 || c < -1e-12;
            if (v.label == RegionLabel::OneDistillable) {
                REQUIRE(one);
                ++n_onedist;
                // at least one canonical vector certifies on the dense state
                FamilyState s = uuvvf(d, eps, delta);
                double best = 1e9;
                for (char kind : {'A', 'B', 'C'})
                    best = std::min(best,
                                    sr2_expectation(canonical_abc(kind, d),
                                                    structured(s)));
                REQUIRE(best < -1e-12);
            } else {
                REQUIRE_FALSE(one);
            }
            if (v.label == RegionLabel::Separable) {
                REQUIRE(is_ppt(dense(uuvvf(d, eps, delta))));
                ++n_sep;
            }
            // never both distillable and provably undistillable
            const double und1 = (1 - 2.0 / d) * (1 - 2.0 / d) +
                                std::min(4 * eps, 0.0) + std::min(2 * delta, 0.0);
            const double und2 =
                9.0 + std::min(12 * (eps * 3 - 1), 0.0) +
                std::min(2 * (delta * 9 - 1), 0.0);
            if (one) REQUIRE((und1 < -1e-12 || und2 < -1e-12));
        }
    REQUIRE(n_onedist > 0);
    REQUIRE(n_sep > 0);
}

TEST_CASE("isotropic_schmidt_number") {
    REQUIRE(isotropic_schmidt_number(3, 2) == 1);
    REQUIRE(isotropic_schmidt_number(3, 10) == 2);
    REQUIRE(isotropic_schmidt_number(3, 100) == 3);
    // nondecreasing in alpha
    int prev = 1;
    for (double alpha = -1; alpha < 40; alpha += 0.25) {
        int k = isotropic_schmidt_number(4, alpha);
        REQUIRE(k >= prev);
        prev = k;
    }
}

TEST_CASE("werner dual threshold") {
    REQUIRE(werner_one_distillable_dual(3).alpha == Catch::Approx(15.0));
    REQUIRE(werner_one_distillable_dual(4).alpha == Catch::Approx(14.0));
    for (int d : {3, 4, 5}) {
        REQUIRE(werner_one_distillable_dual(d).beta_threshold ==
                Catch::Approx(-0.5).margin(1e-9));
    }
    REQUIRE_THROWS_AS(werner_one_distillable_dual(2), std::invalid_argument);
}

TEST_CASE("rainbow_entangled") {
    auto r1 = rainbow_entangled(3, 4, 0.01, 0.2);
    REQUIRE(r1.entangled);  // witness: 0.01*9*15 + 12*0.2*(-1) = -1.05 < 0

    auto r2 = rainbow_entangled(3, 4, 0.01, 0.05);
    REQUIRE_FALSE(r2.entangled);  // closed form +0.75, witness silent, PPT

    auto r3 = rainbow_entangled(3, 4, -0.01, 0.1);
    REQUIRE(r3.entangled);  // NPT branch
}

TEST_CASE("rainbow witness closed form matches dense traces on grids") {
    for (auto [m, d] : std::vector<std::pair<int, int>>{{3, 4}, {3, 5}, {4, 5}}) {
        for (double eps : {-0.02, 0.0, 0.01, 0.03})
            for (double delta : {-0.01, 0.0, 0.05, 0.15}) {
                auto iq = rainbow_inequalities(m, d, eps, delta);
                bool valid = true;
                for (double v : iq) valid &= v >= -1e-12;
                if (!valid) continue;
                // rainbow_entangled itself throws if the signs disagree
                REQUIRE_NOTHROW(rainbow_entangled(m, d, eps, delta));
            }
    }
}

TEST_CASE("rainbow_region labels") {
    // deep one-distillable point: eps < 1/m - 1/2
    REQUIRE(rainbow_region(3, 4, -0.169, 0.0322).label ==
            RegionLabel::OneDistillable);
    REQUIRE(rainbow_region(3, 4, 0.02, 0.1).label == RegionLabel::Separable);
    REQUIRE(rainbow_region(3, 4, 0.01, 0.2).label == RegionLabel::PptEntangled);
}

TEST_CASE("hyperplane_value") {
    // twirled psi_1: tilde coordinates (1/2, 0) at n = 2
    CoordinateVector cv;
    cv.basis_labels = {"x1", "x2"};
    cv.coords = {0.5, 0.0};
    cv.convention = CoordConvention::Tilde;
    REQUIRE(hyperplane_value(cv, 2, 3, false) == Catch::Approx(0.0).margin(1e-14));

    // interior point (1/n + e(1 - 1/n), e, ..., e) for n = 3
    const double e = 0.01;
    CoordinateVector in;
    in.basis_labels = {"x1", "x2", "x3"};
    in.coords = {1.0 / 3 + e * (1 - 1.0 / 3), e, e};
    in.convention = CoordConvention::Tilde;
    REQUIRE(hyperplane_value(in, 3, 3, false) == Catch::Approx(0.0).margin(1e-14));

    // all-zero dual coordinates
    CoordinateVector z;
    z.basis_labels = {"y1", "y2", "x0", "x1", "x2"};
    z.coords = {0, 0, 0, 0, 0};
    REQUIRE(hyperplane_value(z, 2, 3, true) == 0.0);
}

TEST_CASE("hyperplane vanishes on the twirled spanning states") {
    for (int d : {3, 4}) {
        const int n = 2;
        // primal family
        for (int k = 0; k <= n - 1; ++k) {
            auto cv = primal_coordinates(primal_chain_vector(n, k, d).amps, n, d);
            REQUIRE(hyperplane_value(cv, n, d, false) ==
                    Catch::Approx(0.0).margin(1e-9));
        }
        // dual family: both chains have x-coordinates on the hyperplane
        for (int k = 0; k <= n; ++k) {
            auto cv = dual_coordinates(dual_chain_q_vector(n, k, d).amps, n, d);
            REQUIRE(hyperplane_value(cv, n, d, true) ==
                    Catch::Approx(0.0).margin(1e-9));
        }
        for (int k = 0; k <= n - 1; ++k) {
            auto cv = dual_coordinates(dual_chain_x_vector(n, k, d).amps, n, d);
            REQUIRE(hyperplane_value(cv, n, d, true) ==
                    Catch::Approx(0.0).margin(1e-9));
        }
    }
}

TEST_CASE("dual interior point lies on the hyperplane") {
    for (int d : {3, 4, 5}) {
        CoordinateVector cv;
        cv.basis_labels = {"x0", "x1", "x2"};
        cv.coords = {2.0 * (d - 2) / (15 * d), (5.0 * d - 6) / (30.0 * d * (d - 1)),
                     2.0 / (15.0 * d * (d - 1))};
        REQUIRE(hyperplane_value(cv, 2, d, true) ==
                Catch::Approx(0.0).margin(1e-12));
    }
}
