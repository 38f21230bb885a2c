#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "clrl/errors.hpp"
#include "clrl/rd.hpp"
#include "oracles.hpp"

using namespace clrl;

namespace {

DistortionMatrix make_distortion(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t z = 0; z < rows.size(); ++z) {
    for (std::size_t k = 0; k < rows[0].size(); ++k) m.at(z, k) = rows[z][k];
  }
  return DistortionMatrix(m);
}

EmpiricalSource make_source(const std::vector<double>& w) { return {DiscreteDist(w)}; }

double ba_lagrangian(const EmpiricalSource& src, const DistortionMatrix& d, double beta,
                     const BaResult& res) {
  (void)d;
  (void)src;
  return res.rate_nats + beta * res.distortion;
}

}  // namespace

TEST_SUITE_BEGIN("rd");

TEST_CASE("input validation") {
  auto d = make_distortion({{0.0, 1.0}, {1.0, 0.0}});
  auto src = make_source({0.5, 0.5});
  CHECK_THROWS_AS(blahut_arimoto(src, d, -1.0), ValidationError);
  CHECK_THROWS_AS(blahut_arimoto(src, d, std::nan("")), ValidationError);
  CHECK_THROWS_AS(blahut_arimoto(make_source({0.3, 0.3, 0.4}), d, 1.0), ValidationError);
  BaOptions opts;
  opts.max_iters = 0;
  CHECK_THROWS_AS(blahut_arimoto(src, d, 1.0, opts), ValidationError);
  Matrix neg(1, 2);
  neg.at(0, 0) = -0.5;
  neg.at(0, 1) = 0.5;
  CHECK_THROWS_AS(DistortionMatrix(neg).validate(), ValidationError);
}

TEST_CASE("beta zero gives the zero-rate channel with marginal rows") {
  auto d = make_distortion({{0.0, 1.0, 0.3}, {1.0, 0.0, 0.3}});
  auto src = make_source({0.6, 0.4});
  BaResult res = blahut_arimoto(src, d, 0.0);
  CHECK(res.rate_nats == doctest::Approx(0.0).epsilon(1e-12));
  for (std::size_t z = 0; z < 2; ++z) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(res.channel.at(z, k) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  }
  // Distortion of the uniform channel: mean of all entries weighted by w.
  double expect = 0.6 * (0.0 + 1.0 + 0.3) / 3.0 + 0.4 * (1.0 + 0.0 + 0.3) / 3.0;
  CHECK(res.distortion == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bernoulli source under hamming distortion matches the closed form") {
  // For a binary source and Hamming distortion, the optimal slope-beta point
  // sits at D = 1/(1+e^beta) with rate h(p) - h(D), valid while D < min(p,1-p).
  double p = 0.3;
  auto src = make_source({1.0 - p, p});
  auto d = make_distortion({{0.0, 1.0}, {1.0, 0.0}});
  BaOptions opts;
  opts.max_iters = 20000;
  opts.tol = 1e-13;
  for (double target_d : {0.05, 0.1, 0.2}) {
    double beta = std::log((1.0 - target_d) / target_d);
    BaResult res = blahut_arimoto(src, d, beta, opts);
    CHECK(res.distortion == doctest::Approx(target_d).epsilon(1e-5));
    CHECK(res.rate_nats ==
          doctest::Approx(oracle::binary_rd_rate(p, target_d)).epsilon(1e-5));
  }
}

TEST_CASE("frozen hamming rate point") {
  // h(0.3) - h(0.1) in nats.
  CHECK(oracle::binary_rd_rate(0.3, 0.1) == doctest::Approx(0.2857813286634453).epsilon(1e-12));
}

TEST_CASE("matches exhaustive search on small instances") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BaOptions opts;
  opts.max_iters = 50000;
  opts.tol = 1e-14;
  for (int trial = 0; trial < 6; ++trial) {
    std::size_t zn = 2 + trial % 2;
    std::size_t kn = 2 + (trial / 2) % 2;
    std::vector<double> w(zn);
    double s = 0.0;
    for (double& x : w) {
      x = u(rng) + 0.1;
      s += x;
    }
    for (double& x : w) x /= s;
    std::vector<std::vector<double>> d(zn, std::vector<double>(kn));
    for (auto& row : d) {
      for (double& x : row) x = u(rng);
    }
    Matrix dm(zn, kn);
    for (std::size_t z = 0; z < zn; ++z) {
      for (std::size_t k = 0; k < kn; ++k) dm.at(z, k) = d[z][k];
    }
    for (double beta : {0.5, 2.0, 8.0}) {
      BaResult res = blahut_arimoto(make_source(w), DistortionMatrix(dm), beta, opts);
      double ba_l = ba_lagrangian(make_source(w), DistortionMatrix(dm), beta, res);
      double grid_l = oracle::grid_min_dual(w, d, beta, 0.01);
      // The grid value upper-bounds the true optimum, so the solver must not
      // exceed it (beyond convergence slack), and must sit close beneath it.
      CHECK(ba_l <= grid_l + 1e-6);
      CHECK(grid_l - ba_l <= 1e-3);
    }
  }
}

TEST_CASE("matches exhaustive channel enumeration for two outputs") {
  std::vector<double> w{0.5, 0.3, 0.2};
  std::vector<std::vector<double>> d{{0.0, 0.9}, {0.7, 0.1}, {0.4, 0.5}};
  Matrix dm(3, 2);
  for (std::size_t z = 0; z < 3; ++z) {
    for (std::size_t k = 0; k < 2; ++k) dm.at(z, k) = d[z][k];
  }
  BaOptions opts;
  opts.max_iters = 50000;
  opts.tol = 1e-14;
  for (double beta : {1.0, 4.0}) {
    BaResult res = blahut_arimoto(make_source(w), DistortionMatrix(dm), beta, opts);
    double ba_l = res.rate_nats + beta * res.distortion;
    double grid_l = oracle::grid_min_lagrangian_2a(w, d, beta, 0.01);
    CHECK(ba_l <= grid_l + 1e-6);
    CHECK(grid_l - ba_l <= 1e-3);
  }
}

TEST_CASE("per-iteration lagrangian is non-increasing") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t zn = 4 + trial, kn = 3 + trial % 3;
    std::vector<double> w(zn);
    double s = 0.0;
    for (double& x : w) {
      x = u(rng) + 0.05;
      s += x;
    }
    for (double& x : w) x /= s;
    Matrix dm(zn, kn);
    for (std::size_t z = 0; z < zn; ++z) {
      for (std::size_t k = 0; k < kn; ++k) dm.at(z, k) = u(rng);
    }
    double beta = 3.0;
    std::vector<RateDistortionPoint> trace;
    BaOptions opts;
    opts.max_iters = 300;
    opts.tol = 0.0;
    opts.trace = &trace;
    blahut_arimoto(make_source(w), DistortionMatrix(dm), beta, opts);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      double prev = trace[i - 1].rate_nats + beta * trace[i - 1].distortion;
      double cur = trace[i].rate_nats + beta * trace[i].distortion;
      CHECK(cur <= prev + 1e-10);
    }
  }
}

TEST_CASE("rate respects entropy and alphabet caps") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t zn = 2 + trial % 5, kn = 2 + trial % 4;
    std::vector<double> w(zn);
    double s = 0.0;
    for (double& x : w) {
      x = u(rng) + 0.02;
      s += x;
    }
    for (double& x : w) x /= s;
    Matrix dm(zn, kn);
    for (std::size_t z = 0; z < zn; ++z) {
      for (std::size_t k = 0; k < kn; ++k) dm.at(z, k) = u(rng);
    }
    BaResult res = blahut_arimoto(make_source(w), DistortionMatrix(dm), 5.0);
    double cap = std::min(oracle::entropy_nats(w), std::log(static_cast<double>(kn)));
    CHECK(res.rate_nats >= -1e-12);
    CHECK(res.rate_nats <= cap + 1e-9);
  }
}

TEST_CASE("high beta can shrink the output support without error") {
  // Action 2 is dominated everywhere, so its marginal mass must vanish.
  auto src = make_source({0.5, 0.5});
  auto d = make_distortion({{0.0, 0.8, 1.0}, {0.8, 0.0, 1.0}});
  BaOptions opts;
  opts.max_iters = 2000;
  opts.tol = 1e-13;
  BaResult res = blahut_arimoto(src, d, 50.0, opts);
  DiscreteDist q = marginal_output_distribution(src, res.channel);
  CHECK(q[2] < 1e-6);
  for (std::size_t z = 0; z < 2; ++z) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) sum += res.channel.at(z, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("channel construction validates and renormalizes rows") {
  Matrix good(2, 2);
  good.at(0, 0) = 0.5;
  good.at(0, 1) = 0.5 + 1e-10;  // inside tolerance: renormalized
  good.at(1, 0) = 1.0;
  good.at(1, 1) = 0.0;
  Channel ch(good);
  CHECK(ch.at(0, 0) + ch.at(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  Matrix bad(1, 2);
  bad.at(0, 0) = 0.7;
  bad.at(0, 1) = 0.7;
  CHECK_THROWS_AS(Channel{bad}, ValidationError);
  Matrix neg(1, 2);
  neg.at(0, 0) = -0.2;
  neg.at(0, 1) = 1.2;
  CHECK_THROWS_AS(Channel{neg}, ValidationError);
}

TEST_CASE("channel rate and distortion agree with direct sums") {
  std::vector<double> w{0.4, 0.6};
  Matrix rows(2, 2);
  rows.at(0, 0) = 0.9;
  rows.at(0, 1) = 0.1;
  rows.at(1, 0) = 0.2;
  rows.at(1, 1) = 0.8;
  Channel ch(rows);
  auto src = make_source(w);
  std::vector<std::vector<double>> d{{0.0, 1.0}, {1.0, 0.0}};
  // Oracle MI via the Lagrangian helper at beta = 0.
  std::vector<std::vector<double>> rvec{{0.9, 0.1}, {0.2, 0.8}};
  CHECK(channel_rate(src, ch) ==
        doctest::Approx(oracle::lagrangian(w, d, 0.0, rvec)).epsilon(1e-12));
  auto dm = make_distortion(d);
  double expect_dist = 0.4 * 0.1 + 0.6 * 0.2;
  CHECK(channel_distortion(src, ch, dm) == doctest::Approx(expect_dist).epsilon(1e-12));

  // Identical rows carry no information.
  Matrix same(2, 2);
  same.at(0, 0) = same.at(1, 0) = 0.3;
  same.at(0, 1) = same.at(1, 1) = 0.7;
  CHECK(channel_rate(src, Channel(same)) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("min distortion channel splits ties uniformly") {
  auto d = make_distortion({{0.2, 0.2, 0.9}, {0.5, 0.1, 0.1}, {0.3, 0.4, 0.5}});
  Channel ch = min_distortion_channel(d);
  CHECK(ch.at(0, 0) == doctest::Approx(0.5));
  CHECK(ch.at(0, 1) == doctest::Approx(0.5));
  CHECK(ch.at(0, 2) == 0.0);
  CHECK(ch.at(1, 1) == doctest::Approx(0.5));
  CHECK(ch.at(1, 2) == doctest::Approx(0.5));
  CHECK(ch.at(2, 0) == 1.0);
}

TEST_CASE("rd curve is monotone along an ascending beta grid") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t zn = 8, kn = 4;
  std::vector<double> w(zn);
  double s = 0.0;
  for (double& x : w) {
    x = u(rng) + 0.05;
    s += x;
  }
  for (double& x : w) x /= s;
  Matrix dm(zn, kn);
  for (std::size_t z = 0; z < zn; ++z) {
    for (std::size_t k = 0; k < kn; ++k) dm.at(z, k) = u(rng);
  }
  BaOptions opts;
  opts.max_iters = 20000;
  opts.tol = 1e-13;
  std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0};
  auto curve = rd_curve(make_source(w), DistortionMatrix(dm), grid, opts);
  REQUIRE(curve.size() == grid.size());
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].distortion <= curve[i - 1].distortion + 1e-7);
    CHECK(curve[i].rate_nats >= curve[i - 1].rate_nats - 1e-7);
  }
}

TEST_CASE("rd curve rejects a descending grid and handles a single zero beta") {
  auto src = make_source({0.5, 0.5});
  auto d = make_distortion({{0.0, 1.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(rd_curve(src, d, {2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(rd_curve(src, d, {}), ValidationError);
  auto curve = rd_curve(src, d, {0.0});
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].rate_nats == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(curve[0].distortion == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("channel rate stays finite when marginal mass underflows") {
  // Each row leaks denormal mass onto the second output; the averaged
  // marginal q[1] underflows to exactly zero, which must not poison the MI.
  const double dm = std::numeric_limits<double>::denorm_min();
  Matrix rows(3, 2);
  for (std::size_t z = 0; z < 3; ++z) {
    rows.at(z, 0) = 1.0;
    rows.at(z, 1) = dm;
  }
  double rate = channel_rate(EmpiricalSource::uniform(3), Channel(rows));
  CHECK(std::isfinite(rate));
  CHECK(rate == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("csv writer emits the documented schema") {
  std::vector<RateDistortionPoint> curve{{1.5, 0.25, 0.125, 12}};
  std::ostringstream os;
  write_rd_curve_csv(os, curve);
  CHECK(os.str() == "beta,rate_nats,distortion,iters\n1.5,0.25,0.125,12\n");
}

TEST_SUITE_END();
