#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mablab/lower_bounds.hpp"

using namespace mablab;

namespace {

Instance best_arm(std::size_t n, double gap) {
  std::vector<double> mu(n, 1.0 - gap);
  mu[0] = 1.0;
  return Instance::gaussian(mu, 1);
}

Instance table1(std::size_t n, std::size_t k = 5) {
  std::vector<double> mu(n, 0.25);
  std::fill_n(mu.begin(), k, 0.75);
  return Instance::gaussian(mu, k);
}

}  // namespace

TEST(SymmetricKl, GaussianTauIsInverseSquaredGap) {
  const auto inst = best_arm(4, 0.5);
  EXPECT_DOUBLE_EQ(symmetric_kl_inverse(inst, 2), 4.0);
  EXPECT_THROW(symmetric_kl_inverse(inst, 0), std::invalid_argument);
}

TEST(PermutationTail, Examples) {
  const auto inst = best_arm(10, 0.5);
  const auto tb = permutation_tail_bound(inst, 3, 0.125, 0.05);
  EXPECT_NEAR(tb.threshold, 4 * std::log(2.0), 1e-14);
  EXPECT_NEAR(tb.probability, 0.075, 1e-15);
  EXPECT_EQ(permutation_tail_bound(inst, 3, 0.25, 0.05).threshold, 0.0);
  EXPECT_THROW(permutation_tail_bound(inst, 3, 0.05, 0.05), std::invalid_argument);
  EXPECT_THROW(permutation_tail_bound(inst, 3, 0.3, 0.05), std::invalid_argument);
  EXPECT_THROW(permutation_tail_bound(inst, 0, 0.125, 0.05), std::invalid_argument);
}

TEST(PermutationTotal, ReferenceValue) {
  const auto r = permutation_total_bound(best_arm(10, 0.5), 0.05);
  EXPECT_DOUBLE_EQ(r.sum_tau, 36.0);
  // exact sup 0.0523846870 at eta 0.133683849
  EXPECT_NEAR(r.value, 1.885848734, 1e-6);
  EXPECT_NEAR(r.eta_star, 0.133683849, 1e-4);
  EXPECT_FALSE(r.vacuous);
}

TEST(PermutationTotal, VacuousAndScaling) {
  const auto q = permutation_total_bound(best_arm(10, 0.5), 0.25);
  EXPECT_TRUE(q.vacuous);
  EXPECT_EQ(q.value, 0.0);
  EXPECT_LT(permutation_total_bound(best_arm(10, 0.5), 0.2499).value, 1e-6);
  const double base = permutation_total_bound(best_arm(10, 0.2), 0.05).value;
  EXPECT_NEAR(permutation_total_bound(best_arm(10, 0.4), 0.05).value, base / 4, 1e-12 * base);
}

TEST(PermutationTotal, GridRefinementWithinOneStep) {
  const auto inst = best_arm(7, 0.3);
  for (double d : {0.001, 0.05, 0.2}) {
    const auto coarse = permutation_total_bound(inst, d);
    const auto fine = permutation_total_bound(inst, d, kDefaultGridStep / 10);
    EXPECT_LE(coarse.value, fine.value + 1e-15);
    EXPECT_NEAR(coarse.eta_star, fine.eta_star, kDefaultGridStep);
    // derivative of the objective is bounded by log(1/(4 delta)) + 1 on the range
    EXPECT_LE(fine.value - coarse.value, fine.sum_tau * kDefaultGridStep * (std::log(1 / (4 * d)) + 1));
  }
}

TEST(Combined, Examples) {
  EXPECT_DOUBLE_EQ(combined_bound(best_arm(10, 0.5), 0.05), 36.0);
  const double cross = std::exp(-36.0 / 4.0);
  EXPECT_NEAR(combined_bound(best_arm(10, 0.5), cross), 36.0, 1e-12);
  EXPECT_GT(combined_bound(best_arm(10, 0.5), cross / 2), 36.0);
  const auto two = best_arm(2, 0.5);
  EXPECT_NEAR(combined_bound(two, 0.1), 4 * std::log(10.0), 1e-14);
  EXPECT_DOUBLE_EQ(combined_bound(two, 0.5), 4.0);
}

TEST(Combined, PermutationBelowSumBranch) {
  for (double d : {0.01, 0.05, 0.125}) {
    const auto inst = Instance::gaussian(std::vector<double>{1.0, 0.7, 0.6, 0.2, 0.9}, 1);
    double sum = 0;
    for (std::size_t b = 1; b < 5; ++b) sum += symmetric_kl_inverse(inst, b);
    EXPECT_LE(permutation_total_bound(inst, d).value, sum);
  }
}

TEST(GaussianMab, Examples) {
  const auto eq = gaussian_mab_per_arm_bound(best_arm(10, 0.5), 0.05);
  EXPECT_NEAR(eq.value, 4 * std::log(10 / 0.05), 1e-12);
  EXPECT_EQ(eq.argmax_m, 10u);

  std::vector<double> mu(100, 0.5);
  mu[0] = 1.0;
  mu[1] = 0.9;
  const auto r = gaussian_mab_per_arm_bound(Instance::gaussian(mu, 1), 0.05);
  EXPECT_NEAR(r.value, 368.8879454, 1e-6);
  EXPECT_EQ(r.argmax_m, 2u);
  EXPECT_NEAR(4 * std::log(100 / 0.05), 30.40360984, 1e-8);

  EXPECT_NEAR(gaussian_mab_per_arm_bound(best_arm(2, 0.5), 0.01).value, 4 * std::log(200.0), 1e-12);
  EXPECT_FALSE(gaussian_mab_per_arm_bound(best_arm(2, 0.5), 0.1).in_regime);
}

TEST(TopK, Table1Rows) {
  const auto rep = topk_per_arm_bounds(table1(10), 0.05);
  ASSERT_EQ(rep.per_arm.size(), 10u);
  for (const auto& [arm, v] : rep.per_arm) EXPECT_NEAR(v, 19.14996697, 1e-7) << arm;
  EXPECT_NEAR(rep.total, 191.4996697, 1e-6);
}

TEST(TopK, KEqualsOneMatchesGaussianMab) {
  const std::vector<std::vector<double>> cases{
      {1.0, 0.5, 0.5, 0.5}, {0.2, 0.9, 0.8, 0.1, 0.85}, {3.0, 2.0}, {0.0, -0.3, -0.31, -2.0, -0.29, -0.5}};
  for (const auto& mu : cases) {
    const auto inst = Instance::gaussian(mu, 1);
    const auto rep = topk_per_arm_bounds(inst, 0.03);
    EXPECT_NEAR(rep.per_arm.at(inst.best_arm()), gaussian_mab_per_arm_bound(inst, 0.03).value, 1e-12);
  }
}

TEST(Bounds, PermutationInvariant) {
  const std::vector<double> mu{0.1, 0.9, 0.4, 0.55, 0.3, 0.85};
  const auto inst = Instance::gaussian(mu, 1);
  const Permutation pi({4, 2, 5, 0, 3, 1});
  const auto p = apply_permutation(inst, pi);
  EXPECT_DOUBLE_EQ(permutation_total_bound(inst, 0.05).value, permutation_total_bound(p, 0.05).value);
  EXPECT_DOUBLE_EQ(combined_bound(inst, 0.05), combined_bound(p, 0.05));
  EXPECT_DOUBLE_EQ(gaussian_mab_per_arm_bound(inst, 0.05).value, gaussian_mab_per_arm_bound(p, 0.05).value);
  const auto k2 = inst.with_k(2);
  const auto a = topk_per_arm_bounds(k2, 0.05);
  const auto b = topk_per_arm_bounds(apply_permutation(k2, pi), 0.05);
  for (std::size_t arm = 0; arm < mu.size(); ++arm) EXPECT_DOUBLE_EQ(b.per_arm.at(pi(arm)), a.per_arm.at(arm));
}

TEST(Bounds, RejectNonGaussianAndDegenerate) {
  const Instance bern({ArmDistribution::bernoulli(0.6), ArmDistribution::bernoulli(0.3)}, 1);
  EXPECT_THROW(combined_bound(bern, 0.05), std::invalid_argument);
  EXPECT_THROW(topk_per_arm_bounds(bern, 0.05), std::invalid_argument);
  const auto tied = Instance::with_ties(std::vector<ArmDistribution>(3, ArmDistribution::gaussian(0)), 1);
  EXPECT_THROW(combined_bound(tied, 0.05), DegenerateInstanceError);
}

TEST(SubsetBound, Examples) {
  const auto r = best_arm_subset_bound(64, 0.25, 4, 1.0 / 16, 0.125);
  EXPECT_DOUBLE_EQ(r.probability, 0.75);
  EXPECT_EQ(r.threshold, 0.0);  // 64/4 < 2^16
  const auto v = best_arm_subset_bound(1024, 0.25, 1, 1.0 / 16, 0.05);
  EXPECT_EQ(v.threshold, 0.0);
  EXPECT_NEAR(best_arm_subset_bound(1024, 0.25, 1, 0.25, 0.05).threshold, 4.158883083, 1e-9);
  EXPECT_NEAR(v.top_probability, 1 - 1.0 / 16 - 0.05, 1e-15);
  EXPECT_THROW(best_arm_subset_bound(8, 0.25, 8, 0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(best_arm_subset_bound(8, 0.25, 0, 0.1, 0.1), std::invalid_argument);
  for (double beta : {0.0, 0.1, 0.4, 0.6, 2.0})
    for (double d : {0.0, 0.3, 0.9}) {
      const auto s = best_arm_subset_bound(100, 1.0, 3, beta, d);
      EXPECT_GE(s.probability, 0.0);
      EXPECT_LE(s.probability, 1.0);
      EXPECT_GE(s.top_probability, 0.0);
      EXPECT_LE(s.top_probability, 1.0);
    }
}

TEST(FanoRhs, Examples) {
  EXPECT_NEAR(fano_rhs(1000, 1, 0.0, 0.25), 0.8996566681, 1e-10);
  const double tau = (std::log(1000.0 / 4) - std::log(2.0)) / 0.25;
  EXPECT_NEAR(fano_rhs(1000, 4, tau, 0.25), 0.0, 1e-12);
  double prev = 2;
  for (double t = 0; t < 30; t += 0.5) {
    const double v = fano_rhs(1000, 1, t, 0.25);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    if (prev > 0) EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_EQ(fano_rhs(4, 2, 100.0, 1.0), 0.0);
  EXPECT_THROW(fano_rhs(4, 4, 0, 1), std::invalid_argument);
}

TEST(NaturalFamily, GaussianAndBernoulli) {
  const NaturalFamily g;
  EXPECT_NEAR(g.kl(0.5, 0.0), 0.125, 1e-15);
  EXPECT_NEAR(tilted_kl_sum(g, 0.5, 0.0), 2.5 * 0.25, 1e-15);
  const NaturalFamily b{NaturalFamilyKind::Bernoulli};
  // parameters log-odds; kl must match the mean-parameter formula
  const double p = 0.3, q = 0.6;
  const double tp = std::log(p / (1 - p)), tq = std::log(q / (1 - q));
  EXPECT_NEAR(b.kl(tp, tq), 0.18378689738681217, 1e-14);
  EXPECT_NEAR(b.mean(tp), p, 1e-15);
  EXPECT_NEAR(tilted_kl_sum(b, 0.5, -0.5), 0.530271989786496155, 1e-14);
  EXPECT_NEAR(b.log_partition(800.0), 800.0, 1e-12);
}

TEST(NaturalFamily, DomainErrors) {
  const NaturalFamily b{NaturalFamilyKind::Bernoulli, -2.0, 2.0};
  EXPECT_NO_THROW(tilted_kl_sum(b, 1.0, 0.0));
  EXPECT_THROW(tilted_kl_sum(b, 1.5, 0.5), DomainError);
  const std::vector<double> thetas{1.5, 0.5, 1.0};
  EXPECT_THROW(big_main_bound(thetas, 10, 0, b), DomainError);
  EXPECT_THROW(tilted_kl_sum(NaturalFamily{}, std::nan(""), 0.0), DomainError);
}

TEST(BigMain, ReferenceValues) {
  const std::vector<double> thetas{0.5, 0.0};
  const auto r = big_main_bound(thetas, 10.0, 0.0);
  EXPECT_NEAR(r.probability, 0.2522589921, 1e-8);
  EXPECT_NEAR(r.kappa_star, 0.1466953, 1e-4);
  EXPECT_NEAR(r.delta_eff2, 0.625, 1e-15);
  EXPECT_EQ(r.threshold, 0.0);  // log(2/10) < 0
  EXPECT_NEAR(big_main_bound(thetas, 10.0, 0.3).probability, 0, 1e-15);

  std::vector<double> many(30, 0.5);
  many[0] = 1.0;
  EXPECT_NEAR(big_main_bound(many, 1.0, 0.05).threshold, 5.44191581065944860, 1e-12);
}

TEST(BigMain, OrderStatistic) {
  const std::vector<double> thetas{1.0, 0.0, 0.8, 0.6, 0.9};
  // tilted kl sums 2.5 d^2 for d = 1, 0.2, 0.4, 0.1
  EXPECT_NEAR(big_main_bound(thetas, 1, 0.0).delta_eff2, 2.5, 1e-12);
  EXPECT_NEAR(big_main_bound(thetas, 1, 0.0, {}, 2).delta_eff2, 2.5 * 0.01, 1e-12);
  EXPECT_NEAR(big_main_bound(thetas, 1, 0.0, {}, 3).delta_eff2, 2.5 * 0.04, 1e-12);
  EXPECT_NEAR(big_main_bound(thetas, 1, 0.0, {}, 3).threshold, std::log(3.0) / 0.1, 1e-12);
  EXPECT_THROW(big_main_bound(thetas, 1, 0.0, {}, 1), std::invalid_argument);
  EXPECT_THROW(big_main_bound(thetas, 1, 0.0, {}, 6), std::invalid_argument);
  const std::vector<double> bad{0.5, 0.5};
  EXPECT_THROW(big_main_bound(bad, 1, 0.0), std::invalid_argument);
}

TEST(BigMain, EndpointsVanishAndGridStable) {
  const auto f = [](double kappa) { return 0.5 * (1 - std::exp(-10 * kappa * (1 - kappa))) * (1 - 2 * kappa); };
  EXPECT_EQ(f(0.0), 0.0);
  EXPECT_EQ(f(0.5), 0.0);
  const std::vector<double> thetas{0.5, 0.0};
  const auto coarse = big_main_bound(thetas, 10.0, 0.0);
  const auto fine = big_main_bound(thetas, 10.0, 0.0, {}, std::nullopt, kDefaultGridStep / 10);
  EXPECT_GT(coarse.kappa_star, 0.0);
  EXPECT_LT(coarse.kappa_star, 0.5);
  EXPECT_NEAR(coarse.kappa_star, fine.kappa_star, kDefaultGridStep);
  EXPECT_NEAR(coarse.probability, fine.probability, 1e-8);
}

TEST(QOfBeta, Examples) {
  EXPECT_EQ(q_of_beta(0.0), 0.0);
  EXPECT_NEAR(q_of_beta(2.0), 0.9323323584, 1e-10);
  EXPECT_DOUBLE_EQ(q_of_beta(0.5), 0.5);
  EXPECT_THROW(q_of_beta(-1.0), std::invalid_argument);
}
