#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "slipsense/simulator.hpp"
#include "slipsense/tracking.hpp"
#include "support/oracles.hpp"

using namespace slipsense;

namespace {

std::vector<MarkerObservation> to_obs(const std::vector<Vec2>& pts) {
  std::vector<MarkerObservation> out;
  int id = 1;
  for (const Vec2& p : pts) out.push_back(MarkerObservation{id++, p, 50, true});
  return out;
}

std::vector<Vec2> positions(const std::vector<MarkerObservation>& obs) {
  std::vector<Vec2> out;
  for (const auto& o : obs) out.push_back(o.position_mm);
  return out;
}

bool same_matching(const Correspondence& got, const oracle::MatchOracle& want) {
  if (got.pairs.size() != want.pairs.size()) return false;
  auto a = got.pairs;
  auto b = want.pairs;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) return false;
  auto ur = got.unmatched_ref, uc = got.unmatched_cur;
  auto vr = want.unmatched_ref, vc = want.unmatched_cur;
  std::sort(ur.begin(), ur.end());
  std::sort(uc.begin(), uc.end());
  return ur == vr && uc == vc;
}

}  // namespace

TEST_CASE("identical lists pair one to one") {
  GelModel model;
  auto ref = to_obs(marker_grid(model));
  Correspondence c = match_markers(ref, ref, 0.7);
  REQUIRE(c.pairs.size() == ref.size());
  CHECK(c.unmatched_ref.empty());
  CHECK(c.unmatched_cur.empty());
  for (const auto& [i, j] : c.pairs) CHECK(i == j);
}

TEST_CASE("sub-half-pitch shift keeps identity pairing") {
  GelModel model;
  auto ref = to_obs(marker_grid(model));
  auto cur = ref;
  for (auto& o : cur) o.position_mm += Vec2(0.4, 0);
  Correspondence c = match_markers(ref, cur, 0.7);
  REQUIRE(c.pairs.size() == ref.size());
  for (const auto& [i, j] : c.pairs) CHECK(i == j);
}

TEST_CASE("deleted marker lands in unmatched_ref") {
  GelModel model;
  auto ref = to_obs(marker_grid(model));
  auto cur = ref;
  cur.erase(cur.begin() + 137);
  Correspondence c = match_markers(ref, cur, 0.7);
  REQUIRE(c.unmatched_ref.size() == 1);
  CHECK(c.unmatched_ref[0] == 137);
  CHECK(c.pairs.size() == ref.size() - 1);
  CHECK(c.unmatched_cur.empty());

  auto want = oracle::match_exhaustive(positions(ref), positions(cur), 0.7);
  CHECK(same_matching(c, want));
}

TEST_CASE("matching agrees with the exhaustive oracle on random clouds") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ux(0.0, 40.0), uy(0.0, 30.0);
  std::uniform_int_distribution<int> nref(5, 60), jitter(-1, 1);
  for (int it = 0; it < 60; ++it) {
    std::vector<Vec2> ref;
    const int n = nref(rng);
    for (int i = 0; i < n; ++i) ref.emplace_back(ux(rng), uy(rng));
    std::vector<Vec2> cur;
    std::uniform_real_distribution<double> um(-0.6, 0.6);
    for (const Vec2& p : ref)
      if ((it + static_cast<int>(cur.size())) % 7 != 0)  // drop some markers
        cur.push_back(p + Vec2(um(rng), um(rng)));
    for (int e = 0; e < it % 3; ++e) cur.emplace_back(ux(rng), uy(rng));  // spurious extras

    Correspondence got = match_markers(to_obs(ref), to_obs(cur), 0.7);
    auto want = oracle::match_exhaustive(ref, cur, 0.7);
    CHECK(same_matching(got, want));

    // Partial bijection: indices never reused.
    std::vector<int> seen_r, seen_c;
    for (const auto& [i, j] : got.pairs) {
      seen_r.push_back(i);
      seen_c.push_back(j);
    }
    std::sort(seen_r.begin(), seen_r.end());
    std::sort(seen_c.begin(), seen_c.end());
    CHECK(std::adjacent_find(seen_r.begin(), seen_r.end()) == seen_r.end());
    CHECK(std::adjacent_find(seen_c.begin(), seen_c.end()) == seen_c.end());
  }
}

TEST_CASE("swapping frames transposes the matching and negates displacements") {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> ux(0.0, 40.0), uy(0.0, 30.0), um(-0.5, 0.5);
  std::vector<Vec2> ref;
  for (int i = 0; i < 40; ++i) ref.emplace_back(ux(rng), uy(rng));
  std::vector<Vec2> cur;
  for (const Vec2& p : ref) cur.push_back(p + Vec2(um(rng), um(rng)));

  auto ro = to_obs(ref), co = to_obs(cur);
  Correspondence fwd = match_markers(ro, co, 0.7);
  Correspondence bwd = match_markers(co, ro, 0.7);
  auto f = fwd.pairs;
  std::vector<std::pair<int, int>> g;
  for (const auto& [i, j] : bwd.pairs) g.emplace_back(j, i);
  std::sort(f.begin(), f.end());
  std::sort(g.begin(), g.end());
  CHECK(f == g);

  DisplacementField df = displacement_field(fwd, ro, co);
  DisplacementField db = displacement_field(bwd, co, ro);
  REQUIRE(df.entries.size() == db.entries.size());
  for (std::size_t i = 0; i < df.entries.size(); ++i) {
    // Entries come out in pair order; pair k of bwd mirrors some pair of fwd.
    const auto& e = df.entries[i];
    bool found = false;
    for (const auto& r : db.entries)
      if ((r.cur_pos - e.ref_pos).norm() < 1e-12 && (r.ref_pos - e.cur_pos).norm() < 1e-12) {
        CHECK((r.disp + e.disp).norm() < 1e-12);
        found = true;
        break;
      }
    CHECK(found);
  }
}

TEST_CASE("displacement field carries exact differences") {
  CHECK(displacement_field(Correspondence{}, {}, {}).entries.empty());

  GelModel model;
  auto ref = to_obs(marker_grid(model));
  auto cur = ref;
  for (auto& o : cur) o.position_mm += Vec2(0.4, 0);
  DisplacementField field = displacement_field(match_markers(ref, cur, 0.7), ref, cur);
  REQUIRE(field.entries.size() == ref.size());
  for (const auto& e : field.entries) {
    CHECK((e.disp - Vec2(0.4, 0)).norm() < 1e-12);
    CHECK((e.cur_pos - e.ref_pos - e.disp).norm() == 0);
  }
}

TEST_CASE("rotation displacement magnitudes follow the lever arm") {
  GelModel model;
  model.noise_sigma_mm = 0;
  // Small patch so the chord-vs-arc difference stays inside the bound.
  ObjectSpec obj = disk_object("knob", 2.8, 1.2, 3.0, 0.9);
  const Vec2 center(20, 15);
  LoadScript script = make_rotation_ramp(center, 0.02, 1, 0, 1.0);
  auto frames = simulate(model, obj, script, 4);
  REQUIRE(frames.size() >= 2);

  auto ref = to_obs(frames[0].positions);
  auto cur = to_obs(frames[1].positions);
  DisplacementField field = displacement_field(match_markers(ref, cur, 0.7), ref, cur);
  int checked = 0;
  for (std::size_t i = 0; i < field.entries.size(); ++i) {
    const auto& e = field.entries[i];
    const int idx = e.marker_id - 1;
    if (frames[1].states[idx] != MarkerState::kStuck) continue;
    const double r = (e.ref_pos - center).norm();
    CHECK(std::abs(e.disp.norm() - 0.02 * r) < 1e-6);
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("rigid sub-radius motion matches ground-truth pairing on the grid") {
  GelModel model;
  model.noise_sigma_mm = 0;
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> uv(-0.4, 0.4), uw(-0.01, 0.01);
  const auto grid = marker_grid(model);
  for (int it = 0; it < 20; ++it) {
    const RigidMotion2d m{Vec2(20, 15), Vec2(uv(rng), uv(rng)), uw(rng)};
    std::vector<Vec2> cur;
    double max_disp = 0;
    for (const Vec2& g : grid) {
      const Vec2 v = propagate_velocity(m, g);
      max_disp = std::max(max_disp, v.norm());
      cur.push_back(g + v);
    }
    REQUIRE(max_disp < 0.7);
    Correspondence c = match_markers(to_obs(grid), to_obs(cur), 0.7);
    REQUIRE(c.pairs.size() == grid.size());
    for (const auto& [i, j] : c.pairs) CHECK(i == j);
  }
}
