#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "metaacl/rng.hpp"
#include "metaacl/teachers.hpp"

using namespace metaacl;
using Catch::Matchers::WithinAbs;

namespace {

// deterministic scripted student: reward depends only on the task
double scripted_reward(const TaskParams& p) { return 100.0 * p.coords[0]; }

void drive(AlpGmmTeacher& t, Rng& rng, int episodes) {
  for (int i = 0; i < episodes; ++i) {
    const TaskParams p = t.sample(rng);
    t.observe({p, scripted_reward(p)});
  }
}

}  // namespace

TEST_CASE("random teacher draws uniformly from the unit box", "[teachers]") {
  RandomTeacher t(2);
  Rng rng(5);
  double sx = 0.0, sy = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const TaskParams p = t.sample(rng);
    REQUIRE(p.dim() == 2);
    REQUIRE((p.coords[0] >= 0.0 && p.coords[0] < 1.0));
    REQUIRE((p.coords[1] >= 0.0 && p.coords[1] < 1.0));
    sx += p.coords[0];
    sy += p.coords[1];
    t.observe({p, 1.0});
  }
  CHECK_THAT(sx / n, WithinAbs(0.5, 0.02));
  CHECK_THAT(sy / n, WithinAbs(0.5, 0.02));
}

TEST_CASE("bootstrap phase is pure uniform with no mixture", "[teachers]") {
  AlpGmmConfig cfg;
  AlpGmmTeacher t(cfg, 99);
  RandomTeacher ref(2);
  Rng rng_a(17), rng_b(17);
  for (int i = 0; i < 250; ++i) {
    CHECK(!t.current_gmm());
    const TaskParams a = t.sample(rng_a);
    const TaskParams b = ref.sample(rng_b);
    CHECK(t.last_draw_was_uniform());
    CHECK(!t.last_component());
    // the bootstrap consumes no exploration coin, so the stream matches a
    // plain random teacher bit for bit
    REQUIRE(a == b);
    t.observe({a, scripted_reward(a)});
  }
  CHECK(t.current_gmm().has_value());
  CHECK(t.refit_count() == 1);
  CHECK(t.episodes_since_refit() == 0);
}

TEST_CASE("refits happen every fit_rate episodes", "[teachers]") {
  AlpGmmConfig cfg;
  AlpGmmTeacher t(cfg, 42);
  Rng rng(7);
  for (int i = 1; i <= 2000; ++i) {
    const TaskParams p = t.sample(rng);
    t.observe({p, scripted_reward(p)});
    CHECK(t.refit_count() == static_cast<std::size_t>(i / 250));
    CHECK(t.episodes_since_refit() == static_cast<std::size_t>(i % 250));
  }
  CHECK(t.episodes_seen() == 2000);
  CHECK(t.refit_count() == 8);
  const auto& gmm = *t.current_gmm();
  REQUIRE(!gmm.empty());
  for (const auto& c : gmm.components) {
    REQUIRE(c.mean.size() == 3);  // task dims plus the ALP coordinate
    REQUIRE(c.covariance.size() == 9);
    CHECK((c.lp_utility >= 0.0 && c.lp_utility <= 1.0));
  }
}

TEST_CASE("refit hook reports the outgoing mixture and recent reward",
          "[teachers]") {
  AlpGmmConfig cfg;
  AlpGmmTeacher t(cfg, 3);
  Rng rng(13);
  std::vector<double> reported;
  std::vector<std::size_t> outgoing_sizes;
  t.set_refit_hook([&](const WeightedGMM& g, double mean_reward) {
    outgoing_sizes.push_back(g.size());
    reported.push_back(mean_reward);
  });
  std::vector<double> rewards;
  for (int i = 0; i < 1000; ++i) {
    const TaskParams p = t.sample(rng);
    const double r = scripted_reward(p);
    rewards.push_back(r);
    t.observe({p, r});
  }
  // refits at 250/500/750/1000; the first has no outgoing mixture
  REQUIRE(reported.size() == 3);
  for (std::size_t s : outgoing_sizes) CHECK(s >= 2);
  for (int k = 0; k < 3; ++k) {
    // reign k+2 covers episodes [250(k+1), 250(k+2)); the reported value is
    // the mean over its last 50 episodes, uniform draws included
    double s = 0.0;
    for (int i = 250 * (k + 2) - 50; i < 250 * (k + 2); ++i) s += rewards[i];
    CHECK_THAT(reported[k], WithinAbs(s / 50.0, 1e-9));
  }
}

TEST_CASE("exploration coin respects rho_rnd after bootstrap", "[teachers]") {
  AlpGmmConfig cfg;
  cfg.rho_rnd = 0.10;
  AlpGmmTeacher t(cfg, 21);
  Rng rng(23);
  drive(t, rng, 250);  // leave bootstrap
  int uniform = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const TaskParams p = t.sample(rng);
    REQUIRE((p.coords[0] >= 0.0 && p.coords[0] <= 1.0));
    REQUIRE((p.coords[1] >= 0.0 && p.coords[1] <= 1.0));
    if (t.last_draw_was_uniform()) {
      ++uniform;
      CHECK(!t.last_component());
    } else {
      CHECK(t.last_component());
    }
    t.observe({p, scripted_reward(p)});
  }
  CHECK_THAT(uniform / static_cast<double>(n), WithinAbs(0.10, 0.01));
}

TEST_CASE("rho_rnd = 0 never draws the uniform branch after bootstrap",
          "[teachers]") {
  AlpGmmConfig cfg;
  cfg.rho_rnd = 0.0;
  AlpGmmTeacher t(cfg, 4);
  Rng rng(41);
  drive(t, rng, 250);
  for (int i = 0; i < 2000; ++i) {
    const TaskParams p = t.sample(rng);
    CHECK(!t.last_draw_was_uniform());
    t.observe({p, scripted_reward(p)});
  }
}

TEST_CASE("identical seeds give identical task streams", "[teachers]") {
  AlpGmmConfig cfg;
  AlpGmmTeacher a(cfg, 77), b(cfg, 77);
  Rng ra(55), rb(55);
  for (int i = 0; i < 1500; ++i) {
    const TaskParams pa = a.sample(ra);
    const TaskParams pb = b.sample(rb);
    REQUIRE(pa == pb);
    a.observe({pa, scripted_reward(pa)});
    b.observe({pb, scripted_reward(pb)});
  }
}

TEST_CASE("reset_gmm returns the teacher to uniform sampling", "[teachers]") {
  AlpGmmConfig cfg;
  AlpGmmTeacher t(cfg, 8);
  Rng rng(9);
  drive(t, rng, 500);
  REQUIRE(t.current_gmm());
  t.reset_gmm();
  CHECK(!t.current_gmm());
  const TaskParams p = t.sample(rng);
  CHECK(t.last_draw_was_uniform());
  t.observe({p, scripted_reward(p)});
  // history and episode count are preserved, so the cadence continues
  CHECK(t.episodes_seen() == 501);
  drive(t, rng, 249);
  CHECK(t.current_gmm().has_value());
  CHECK(t.refit_count() == 3);
}

TEST_CASE("teacher configuration is validated", "[teachers]") {
  AlpGmmConfig bad_dim;
  bad_dim.task_dim = 0;
  CHECK_THROWS_AS(AlpGmmTeacher(bad_dim, 1), std::invalid_argument);
  AlpGmmConfig bad_rate;
  bad_rate.fit_rate = 0;
  CHECK_THROWS_AS(AlpGmmTeacher(bad_rate, 1), std::invalid_argument);
  AlpGmmConfig bad_rho;
  bad_rho.rho_rnd = 1.5;
  CHECK_THROWS_AS(AlpGmmTeacher(bad_rho, 1), std::invalid_argument);
  AlpGmmConfig ok;
  AlpGmmTeacher t(ok, 1);
  CHECK_THROWS_AS(t.set_rho_rnd(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(t.observe({TaskParams{{0.5}}, 1.0}), std::invalid_argument);
}

namespace {

AdrConfig adr_config(double x, double y) {
  AdrConfig cfg;
  cfg.p_easy = TaskParams{x, y};
  return cfg;
}

}  // namespace

TEST_CASE("fresh ADR box is the single easy point", "[teachers]") {
  AdrTeacher t(adr_config(0.275, 0.725));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const TaskParams p = t.sample(rng);
    CHECK(p.coords[0] == 0.275);
    CHECK(p.coords[1] == 0.725);
  }
  CHECK(t.low() == std::vector<double>{0.275, 0.725});
  CHECK(t.high() == std::vector<double>{0.275, 0.725});
}

TEST_CASE("ADR expands a face after a full queue of good rewards",
          "[teachers]") {
  AdrTeacher t(adr_config(0.5, 0.5));
  Rng rng(31);
  // every episode succeeds; each face expands once its queue fills
  for (int i = 0; i < 400; ++i) {
    const TaskParams p = t.sample(rng);
    t.observe({p, 1.0});
  }
  // 400 episodes, ~200 boundary draws, ~50 per face: each face has moved
  CHECK(t.low()[0] < 0.5);
  CHECK(t.low()[1] < 0.5);
  CHECK(t.high()[0] > 0.5);
  CHECK(t.high()[1] > 0.5);
  // every bound is a whole number of steps from the start
  for (int j = 0; j < 2; ++j) {
    const double steps_low = (0.5 - t.low()[j]) / 0.05;
    const double steps_high = (t.high()[j] - 0.5) / 0.05;
    CHECK_THAT(steps_low, WithinAbs(std::round(steps_low), 1e-9));
    CHECK_THAT(steps_high, WithinAbs(std::round(steps_high), 1e-9));
  }
}

TEST_CASE("ADR never expands on poor rewards", "[teachers]") {
  AdrTeacher t(adr_config(0.5, 0.5));
  Rng rng(37);
  for (int i = 0; i < 500; ++i) {
    const TaskParams p = t.sample(rng);
    t.observe({p, 0.0});
  }
  CHECK(t.low() == std::vector<double>{0.5, 0.5});
  CHECK(t.high() == std::vector<double>{0.5, 0.5});
}

TEST_CASE("ADR boundary draws pin exactly one face coordinate", "[teachers]") {
  AdrTeacher t(adr_config(0.5, 0.5));
  Rng rng(43);
  for (int i = 0; i < 2000; ++i) {  // grow a non-degenerate box first
    const TaskParams p = t.sample(rng);
    t.observe({p, 1.0});
  }
  REQUIRE(t.low()[0] < t.high()[0]);
  REQUIRE(t.low()[1] < t.high()[1]);
  const auto low = t.low();
  const auto high = t.high();
  int boundary = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const TaskParams p = t.sample(rng);  // not observed: the box is frozen
    bool on_face = false;
    for (int j = 0; j < 2; ++j) {
      REQUIRE(p.coords[j] >= low[j]);
      REQUIRE(p.coords[j] <= high[j]);
      if (p.coords[j] == low[j] || p.coords[j] == high[j]) on_face = true;
    }
    if (on_face) ++boundary;
  }
  // interior draws touch a face with probability zero
  CHECK_THAT(boundary / static_cast<double>(n), WithinAbs(0.5, 0.02));
  CHECK(t.low() == low);
  CHECK(t.high() == high);
}

TEST_CASE("ADR expansion clips to the unit box", "[teachers]") {
  AdrTeacher t(adr_config(0.025, 0.5));
  Rng rng(53);
  for (int i = 0; i < 4000; ++i) {
    const TaskParams p = t.sample(rng);
    t.observe({p, 1.0});
    CHECK(t.low()[0] >= 0.0);
    CHECK(t.low()[1] >= 0.0);
    CHECK(t.high()[0] <= 1.0);
    CHECK(t.high()[1] <= 1.0);
  }
  CHECK(t.low()[0] == 0.0);  // one step from 0.025 hits the wall
}

TEST_CASE("ADR bounds are monotone over time", "[teachers]") {
  AdrTeacher t(adr_config(0.4, 0.6));
  Rng rng(59), reward_rng(61);
  auto low = t.low();
  auto high = t.high();
  for (int i = 0; i < 3000; ++i) {
    const TaskParams p = t.sample(rng);
    t.observe({p, reward_rng.uniform() < 0.7 ? 2.0 : 0.0});
    for (int j = 0; j < 2; ++j) {
      CHECK(t.low()[j] <= low[j]);
      CHECK(t.high()[j] >= high[j]);
    }
    low = t.low();
    high = t.high();
  }
}

TEST_CASE("ADR configuration is validated", "[teachers]") {
  AdrConfig no_easy;
  CHECK_THROWS_AS(AdrTeacher(no_easy), std::invalid_argument);
  AdrConfig outside = adr_config(1.2, 0.5);
  CHECK_THROWS_AS(AdrTeacher(outside), std::invalid_argument);
  AdrConfig zero_q = adr_config(0.5, 0.5);
  zero_q.queue_capacity = 0;
  CHECK_THROWS_AS(AdrTeacher(zero_q), std::invalid_argument);
}
