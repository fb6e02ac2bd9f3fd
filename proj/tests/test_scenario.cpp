#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eebeam/scenario.hpp"

using namespace eebeam;

TEST_SUITE_BEGIN("scenario");

namespace {
ScenarioConfig base_config() {
  ScenarioConfig cfg;
  cfg.cells = 7;
  cfg.antennas = 4;
  cfg.users_per_cell = 2;
  cfg.seed = 42;
  return cfg;
}
}  // namespace

TEST_CASE("layout: 7-cell ring at the inter-BS distance") {
  const Layout layout = build_layout(base_config());
  REQUIRE(layout.bs_positions.size() == 7);
  CHECK(layout.bs_positions[0].norm() == doctest::Approx(0.0));
  for (int i = 1; i < 7; ++i)
    CHECK(layout.bs_positions[i].norm() == doctest::Approx(120.0));
}

TEST_CASE("layout: wrap distance never exceeds the direct distance") {
  const Layout layout = build_layout(base_config());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-300.0, 300.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector2d a(coord(rng), coord(rng)), b(coord(rng), coord(rng));
    CHECK(layout.wrap_distance(a, b) <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("layout: all BS pairs are adjacent under wrap-around") {
  const Layout layout = build_layout(base_config());
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j)
      CHECK(layout.wrap_distance(layout.bs_positions[i], layout.bs_positions[j]) ==
            doctest::Approx(120.0).epsilon(1e-9));
}

TEST_CASE("layout: BS-BS distance multiset invariant under relabeling") {
  const Layout layout = build_layout(base_config());
  auto distances_from = [&](int center) {
    std::vector<double> d;
    for (int j = 0; j < 7; ++j)
      if (j != center)
        d.push_back(layout.wrap_distance(layout.bs_positions[center], layout.bs_positions[j]));
    std::sort(d.begin(), d.end());
    return d;
  };
  const auto ref = distances_from(0);
  for (int c = 1; c < 7; ++c) {
    const auto d = distances_from(c);
    for (int i = 0; i < 6; ++i) CHECK(d[i] == doctest::Approx(ref[i]).epsilon(1e-9));
  }
}

TEST_CASE("layout: single cell and unsupported counts") {
  ScenarioConfig cfg = base_config();
  cfg.cells = 1;
  const Layout single = build_layout(cfg);
  CHECK(single.bs_positions.size() == 1);
  CHECK(single.wrap_offsets.size() == 1);

  cfg.cells = 5;
  CHECK_THROWS_AS(build_layout(cfg), std::invalid_argument);
}

TEST_CASE("drop_users: cell-edge placement and determinism") {
  const ScenarioConfig cfg = base_config();
  const Layout layout = build_layout(cfg);
  auto rng1 = make_rng(99);
  const UserDrop d1 = drop_users(layout, cfg, rng1);
  REQUIRE(d1.positions.size() == 14);
  for (std::size_t k = 0; k < d1.positions.size(); ++k) {
    const double dist =
        layout.wrap_distance(layout.bs_positions[d1.serving[k]], d1.positions[k]);
    CHECK(dist == doctest::Approx(60.0).epsilon(1e-12));
  }
  auto rng2 = make_rng(99);
  const UserDrop d2 = drop_users(layout, cfg, rng2);
  for (std::size_t k = 0; k < d1.positions.size(); ++k)
    CHECK(d1.positions[k] == d2.positions[k]);
}

TEST_CASE("drop_users: no users") {
  ScenarioConfig cfg = base_config();
  cfg.users_per_cell = 0;
  const Layout layout = build_layout(cfg);
  auto rng = make_rng(1);
  CHECK(drop_users(layout, cfg, rng).positions.empty());
}

TEST_CASE("path_gain_db: reference values") {
  CHECK(path_gain_db(1.0, 0.0) == doctest::Approx(35.0));
  CHECK(path_gain_db(60.0, 0.0) == doctest::Approx(35.0 + 30.0 * std::log10(60.0)));
  CHECK(path_gain_db(60.0, 0.0) == doctest::Approx(88.3415).epsilon(1e-4));
  CHECK(path_gain_db(120.0, 0.0) - path_gain_db(60.0, 0.0) ==
        doctest::Approx(30.0 * std::log10(2.0)));
  CHECK_THROWS_AS(path_gain_db(0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(path_gain_db(-3.0, 0.0), std::domain_error);
}

TEST_CASE("path gain decreases with distance at fixed shadowing") {
  double prev = db_to_linear(-path_gain_db(1.0, 3.0));
  for (double d = 2.0; d < 400.0; d *= 1.5) {
    const double g = db_to_linear(-path_gain_db(d, 3.0));
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("generate_channels: zero gain, moment check, determinism") {
  ScenarioConfig cfg = base_config();
  cfg.cells = 1;
  cfg.users_per_cell = 2;
  const Layout layout = build_layout(cfg);
  auto rng = make_rng(5);
  const UserDrop drop = drop_users(layout, cfg, rng);

  Eigen::MatrixXd gains(1, 2);
  gains << 0.0, 1.0;
  SUBCASE("zero path gain gives a zero channel") {
    auto rng_ch = make_rng(7);
    const ChannelSet cs = generate_channels(drop, gains, cfg, rng_ch);
    CHECK(cs.h[0].col(0).norm() == 0.0);
    CHECK(cs.h[0].col(1).norm() > 0.0);
  }
  SUBCASE("unit-gain entries have unit mean square power") {
    // 1e5 draws via repeated regeneration of a 4x2 block
    auto rng_ch = make_rng(11);
    double sum = 0.0;
    long n = 0;
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, 2);
    for (int rep = 0; rep < 12500; ++rep) {
      const ChannelSet cs = generate_channels(drop, ones, cfg, rng_ch);
      sum += cs.h[0].squaredNorm();
      n += cs.h[0].size();
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("same seed gives bit-identical channels") {
    auto ra = make_rng(13), rb = make_rng(13);
    const ChannelSet a = generate_channels(drop, gains, cfg, ra);
    const ChannelSet b = generate_channels(drop, gains, cfg, rb);
    CHECK(a.h[0] == b.h[0]);
  }
}

TEST_CASE("make_scenario is deterministic per seed") {
  const ScenarioConfig cfg = base_config();
  const Scenario a = make_scenario(cfg);
  const Scenario b = make_scenario(cfg);
  REQUIRE(a.channels.num_users() == 14);
  for (int bb = 0; bb < 7; ++bb) CHECK(a.channels.h[bb] == b.channels.h[bb]);
  CHECK(a.channels.path_gain == b.channels.path_gain);

  ScenarioConfig other = cfg;
  other.seed = 43;
  const Scenario c = make_scenario(other);
  CHECK(a.channels.h[0] != c.channels.h[0]);
}

TEST_CASE("contaminate: orthogonal allocation is the identity") {
  const Scenario sc = make_scenario(base_config());
  const auto alloc = PilotAllocation::orthogonal(sc.channels.num_users());
  const ObservedChannelSet obs = contaminate(sc.channels, alloc);
  for (int b = 0; b < sc.channels.num_bs(); ++b) CHECK(obs.channels.h[b] == sc.channels.h[b]);
}

TEST_CASE("contaminate: shared pilots superimpose the group") {
  const Scenario sc = make_scenario(base_config());
  const int num_users = sc.channels.num_users();
  PilotAllocation alloc;
  alloc.groups.push_back({0, 1});  // users 0 and 1 share a resource
  alloc.group_of.assign(num_users, -1);
  alloc.group_of[0] = alloc.group_of[1] = 0;
  for (int k = 2; k < num_users; ++k) {
    alloc.group_of[k] = static_cast<int>(alloc.groups.size());
    alloc.groups.push_back({k});
  }
  const ObservedChannelSet obs = contaminate(sc.channels, alloc);
  for (int b = 0; b < sc.channels.num_bs(); ++b) {
    const cvec expected0 = sc.channels.h[b].col(0) + sc.channels.h[b].col(1);
    CHECK((obs.channels.h[b].col(0) - expected0).norm() == 0.0);
    // both users of a pair produce the same observation
    CHECK((obs.channels.h[b].col(0) - obs.channels.h[b].col(1)).norm() == 0.0);
    // the contamination added to user 0 is user 1's channel
    const cvec added = obs.channels.h[b].col(0) - sc.channels.h[b].col(0);
    CHECK((added - sc.channels.h[b].col(1)).norm() <=
          1e-15 * sc.channels.h[b].col(1).norm());
    // untouched users keep their channels
    CHECK(obs.channels.h[b].col(2) == sc.channels.h[b].col(2));
  }
}

TEST_CASE("contaminate: incomplete allocation is rejected") {
  const Scenario sc = make_scenario(base_config());
  PilotAllocation alloc = PilotAllocation::orthogonal(sc.channels.num_users());
  alloc.group_of.pop_back();
  CHECK_THROWS_AS(contaminate(sc.channels, alloc), std::invalid_argument);
  PilotAllocation bad = PilotAllocation::orthogonal(sc.channels.num_users());
  bad.group_of[3] = -1;
  CHECK_THROWS_AS(contaminate(sc.channels, bad), std::invalid_argument);
}

TEST_CASE("config validation") {
  ScenarioConfig cfg = base_config();
  cfg.tau_ul = 1;  // below users_per_cell
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.tau_ul = 60;
  cfg.tau_dl = 60;  // overhead >= U
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.bandwidth_hz = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_SUITE_END();
