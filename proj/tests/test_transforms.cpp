#include <gtest/gtest.h>

#include "derivelog/error.hpp"
#include "derivelog/search.hpp"
#include "derivelog/spaces.hpp"
#include "derivelog/transforms.hpp"
#include "support.hpp"

namespace derivelog {
namespace {

std::vector<Point> identity(std::size_t n) {
  std::vector<Point> id(n);
  for (Point i = 0; i < n; ++i) id[i] = i;
  return id;
}

std::vector<Formula> glc_axiom_subformulas() {
  std::vector<Formula> out;
  for (const auto& s : logic_axioms(FrameClass::GLC)) {
    for (const auto& f : subformula_closure(s.templ)) out.push_back(f);
  }
  return out;
}

TEST(Oplus, ReflexivePoint) {
  Model m(DynamicFrame(1, {{0, 0}}, std::vector<Point>{0}), {{"p", PointSet{0}}});
  const auto r = oplus(m);
  const DynamicFrame& fr = *r.model.frame();
  EXPECT_EQ(fr.size(), 2U);
  EXPECT_EQ(fr.pairs(), (std::vector<std::pair<Point, Point>>{{0, 1}, {1, 0}}));
  EXPECT_EQ(fr.function(), (std::vector<Point>{0, 0}));
  EXPECT_EQ(r.projection, (std::vector<Point>{0, 0}));
  EXPECT_EQ(r.model.value("p"), (PointSet{0, 1}));
}

TEST(Oplus, IrreflexivePoint) {
  Model m(DynamicFrame(1, {}, std::vector<Point>{0}), {});
  const auto r = oplus(m);
  EXPECT_EQ(r.model.size(), 1U);
  EXPECT_TRUE(r.model.frame()->pairs().empty());
}

TEST(Oplus, RejectsOutsideClass) {
  Model m(DynamicFrame(2, {{0, 1}}, std::vector<Point>{1, 0}), {});
  EXPECT_THROW(oplus(m), ClassViolation);
}

TEST(Oplus, ProjectionIsSurjectivePMorphismUpToFourWorlds) {
  Rng rng(8);
  const auto formulas = glc_axiom_subformulas();
  for (std::size_t n = 1; n <= 4; ++n) {
    for (const auto& fr : enumerate_frames(n, FrameClass::WK4C, {true, n == 4})) {
      Model m(fr, {{"p", rng.subset(n)}, {"q", rng.subset(n)}});
      const auto r = oplus(m);
      const DynamicFrame& out = *r.model.frame();
      std::size_t reflexive = 0;
      for (Point w = 0; w < n; ++w) reflexive += fr.related(w, w) ? 1 : 0;
      ASSERT_EQ(out.size(), n + reflexive);
      ASSERT_TRUE(relation_properties(out).irreflexive.holds);
      ASSERT_TRUE(in_class(out, FrameClass::WK4C));
      PMorphismOptions opts;
      opts.require_surjective = true;
      ASSERT_TRUE(check_dynamic_pmorphism(r.model, m, r.projection, opts).ok);
      ASSERT_TRUE(check_truth_preservation(r.model, m, r.projection, formulas, opts).ok());
    }
  }
}

TEST(Unwind, TwoChain) {
  Model m(DynamicFrame(2, {{0, 1}}, identity(2)), {{"p", PointSet{1}}});
  const auto u = unwind(m);
  ASSERT_EQ(u.sequences, (std::vector<std::vector<Point>>{{0}, {1}, {0, 1}}));
  EXPECT_TRUE(u.exact);
  EXPECT_TRUE(u.frontier.empty());
  EXPECT_EQ(u.model.frame()->pairs(), (std::vector<std::pair<Point, Point>>{{0, 2}}));
  EXPECT_EQ(u.projection, (std::vector<Point>{0, 1, 1}));
  EXPECT_EQ(u.model.value("p"), (PointSet{1, 2}));
}

TEST(Unwind, FunctionDropsRepeatedEntries) {
  // 0 rel 1, both sent to the irreflexive point 2.
  Model m(DynamicFrame(3, {{0, 1}}, std::vector<Point>{2, 2, 2}), {});
  const auto u = unwind(m);
  ASSERT_EQ(u.sequences, (std::vector<std::vector<Point>>{{0}, {1}, {2}, {0, 1}}));
  EXPECT_EQ(u.model.function()[3], 2U);
}

TEST(Unwind, ReflexivePointIsTruncated) {
  Model m(DynamicFrame(1, {{0, 0}}, std::vector<Point>{0}), {});
  const auto u = unwind(m, 2);
  EXPECT_EQ(u.sequences, (std::vector<std::vector<Point>>{{0}, {0, 0}}));
  EXPECT_FALSE(u.exact);
  EXPECT_EQ(u.frontier, PointSet{1});
  EXPECT_EQ(u.depth_bound, 2U);
}

TEST(Unwind, AutoBoundUsesQueryDepth) {
  Model m(DynamicFrame(1, {{0, 0}}, std::vector<Point>{0}), {});
  EXPECT_EQ(unwind(m).depth_bound, 1U);
  EXPECT_EQ(unwind(m, std::nullopt, parse("X X p")).depth_bound, 3U);
  EXPECT_THROW(unwind(Model(DynamicFrame(2, {{0, 1}, {1, 0}}, identity(2)), {})), ClassViolation);
}

TEST(Unwind, OutputShapeAndExactPreservation) {
  Rng rng(12);
  testing::FormulaGen g;
  std::vector<Formula> formulas;
  for (int i = 0; i < 30; ++i) {
    const Formula f = testing::random_formula(rng, 3, g);
    if (modal_depth(f) <= 3) formulas.push_back(f);
  }
  for (std::size_t n = 1; n <= 3; ++n) {
    for (const auto& fr : enumerate_frames(n, FrameClass::K4C)) {
      Model m(fr, {{"p", rng.subset(n)}, {"q", rng.subset(n)}});
      const auto u = unwind(m);
      const auto rr = relation_properties(*u.model.frame());
      ASSERT_TRUE(rr.transitive.holds);
      ASSERT_TRUE(rr.irreflexive.holds);
      ASSERT_TRUE(rr.antisymmetric.holds);
      PMorphismOptions opts;
      opts.skip_back = u.frontier;
      ASSERT_TRUE(check_dynamic_pmorphism(u.model, m, u.projection, opts).ok);
      if (u.exact) {
        ASSERT_TRUE(is_td(alexandroff_from_frame(*u.model.frame())));
        opts.require_surjective = true;
        ASSERT_TRUE(check_truth_preservation(u.model, m, u.projection, formulas, opts).ok());
      }
    }
  }
}

TEST(PowerSystem, OneCopyIsIdentity) {
  const auto sp = DerivativeSpace::from_frame(DynamicFrame(2, {{0, 1}}));
  const Model m = power_system(sp, 1, {{{"p", 0}, PointSet{1}}});
  EXPECT_EQ(m.function(), (std::vector<Point>{0, 1}));
  EXPECT_EQ(m.value("p"), PointSet{1});
  for (std::uint64_t s = 0; s < 4; ++s) {
    EXPECT_EQ(m.space().rho(PointSet::from_mask(s)), sp.rho(PointSet::from_mask(s)));
  }
  EXPECT_THROW(power_system(sp, 0, {}), InputError);
}

TEST(PowerSystem, TwoCopiesOfAPointSwap) {
  const auto sp = DerivativeSpace::from_topology(FiniteTopology::discrete(1));
  const Model m = power_system(sp, 2, {{{"p", 1}, PointSet{0}}});
  EXPECT_EQ(m.function(), (std::vector<Point>{1, 0}));
  EXPECT_EQ(m.value("p"), PointSet{1});
}

TEST(PowerSystem, ShiftIsAHomeomorphismOfOrderN) {
  for (std::size_t a = 1; a <= 3; ++a) {
    testing::for_each_relation(a, [&](const DynamicFrame& fr) {
      if (!testing::naive_weakly_transitive(fr)) return;
      const auto sp = DerivativeSpace::from_frame(fr);
      for (std::size_t n = 1; n <= 3; ++n) {
        const Model m = power_system(sp, n, {});
        std::vector<Point> it = identity(m.size());
        for (std::size_t k = 0; k < n; ++k)
          for (auto& x : it) x = m.function()[x];
        ASSERT_EQ(it, identity(m.size()));
        ASSERT_TRUE(check_homeomorphism(m.function(), m.space(), m.space(),
                                        CheckMode::exhaustive_up_to(12)).holds);
      }
    });
  }
}

TEST(PowerSystem, PreservesNormalFormulasWithinDepth) {
  Rng rng(5);
  testing::FormulaGen g;
  g.allow_constants = false;
  std::vector<Formula> formulas;
  for (int i = 0; i < 80; ++i) formulas.push_back(to_next_normal_form(testing::random_formula(rng, 4, g)));
  for (std::size_t a = 1; a <= 2; ++a) {
    testing::for_each_relation(a, [&](const DynamicFrame& fr) {
      if (!testing::naive_weakly_transitive(fr)) return;
      const auto sp = DerivativeSpace::from_frame(fr);
      for (std::size_t n = 1; n <= 3; ++n) {
        ExtendedValuation ev;
        for (const char* v : {"p", "q"})
          for (std::size_t i = 0; i < 4; ++i) ev[{v, i}] = rng.subset(a);
        const Model m = power_system(sp, n, ev);
        for (const auto& f : formulas) {
          const PointSet lifted = truth_set(m, f);
          for (std::size_t i = 0; i < n; ++i) {
            if (next_depth(f) >= n - i) continue;
            // Copy i reads the extended valuation i steps ahead.
            const PointSet base =
                extended_truth_set(sp, ev, to_next_normal_form(Formula::next_pow(f, i)));
            for (Point w = 0; w < a; ++w) {
              ASSERT_EQ(lifted.contains(static_cast<Point>(i * a + w)), base.contains(w)) << render(f);
            }
          }
        }
      }
    });
  }
}

TEST(ExtendedTruth, RejectsNonNormalFormulas) {
  const auto sp = DerivativeSpace::from_topology(FiniteTopology::discrete(1));
  EXPECT_THROW(extended_truth_set(sp, {}, parse("X ~p")), PreconditionViolated);
  EXPECT_EQ(extended_truth_set(sp, {{{"p", 2}, PointSet{0}}}, parse("X X p")), PointSet{0});
}

TEST(PMorphism, Identity) {
  const Model m = random_model(FrameClass::K4C, 4, 9);
  EXPECT_TRUE(check_dynamic_pmorphism(m, m, identity(4)).ok);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Formula f = testing::random_formula(rng, 4);
    EXPECT_TRUE(check_truth_preservation(m, m, identity(4), {f}).ok());
  }
}

TEST(PMorphism, CollapsingAChain) {
  Model chain(DynamicFrame(2, {{0, 1}}, identity(2)), {});
  Model irr(DynamicFrame(1, {}, std::vector<Point>{0}), {});
  const auto v1 = check_dynamic_pmorphism(chain, irr, {0, 0});
  EXPECT_FALSE(v1.ok);
  EXPECT_EQ(v1.failed, "forth");
  Model refl(DynamicFrame(1, {{0, 0}}, std::vector<Point>{0}), {});
  const auto v2 = check_dynamic_pmorphism(chain, refl, {0, 0});
  EXPECT_FALSE(v2.ok);
  EXPECT_EQ(v2.failed, "back");
  EXPECT_EQ(v2.witness, (std::vector<Point>{1, 0}));
  EXPECT_THROW(check_truth_preservation(chain, refl, {0, 0}, {parse("p")}), PreconditionViolated);
}

TEST(PMorphism, CommutingAtomsSurjective) {
  Model a(DynamicFrame(2, {}, std::vector<Point>{1, 0}), {{"p", PointSet{0}}});
  Model b(DynamicFrame(2, {}, identity(2)), {{"p", PointSet{0}}});
  EXPECT_EQ(check_dynamic_pmorphism(a, b, {0, 1}).failed, "commuting");
  Model c(DynamicFrame(2, {}, identity(2)), {{"p", PointSet{1}}});
  const auto v = check_dynamic_pmorphism(b, c, {0, 1});
  EXPECT_EQ(v.failed, "atoms");
  EXPECT_EQ(v.variable, "p");
  Model one(DynamicFrame(1, {}, std::vector<Point>{0}), {});
  Model two(DynamicFrame(2, {}, identity(2)), {});
  PMorphismOptions opts;
  opts.require_surjective = true;
  EXPECT_EQ(check_dynamic_pmorphism(one, two, {0}, opts).failed, "surjective");
  EXPECT_THROW(check_dynamic_pmorphism(one, two, {2}), InputError);
}

Moment single(FrameClass cls, Valuation val = {}) {
  Moment m;
  m.frame = DynamicFrame(1);
  m.valuation = std::move(val);
  m.cls = cls;
  return m;
}

TEST(ComposeMoment, Examples) {
  const Moment a = compose_moment({}, {}, FrameClass::GLC);
  EXPECT_EQ(a.frame.size(), 1U);
  EXPECT_TRUE(validate_moment(a).ok);

  const Moment t = compose_moment({}, {single(FrameClass::GLC), single(FrameClass::GLC)}, FrameClass::GLC);
  EXPECT_EQ(t.frame.pairs(), (std::vector<std::pair<Point, Point>>{{0, 1}, {0, 2}}));
  EXPECT_EQ(t.root, 0U);

  ClusterSpec cl;
  cl.size = 2;
  cl.rel = {{0, 1}, {1, 0}};
  const Moment c = compose_moment(cl, {single(FrameClass::WK4C)}, FrameClass::WK4C);
  EXPECT_EQ(c.frame.size(), 3U);
  EXPECT_TRUE(c.frame.related(0, 1));
  EXPECT_TRUE(c.frame.related(1, 0));
  EXPECT_TRUE(c.frame.related(0, 2));
  EXPECT_TRUE(c.frame.related(1, 2));
  EXPECT_TRUE(validate_moment(c).ok);

  EXPECT_THROW(compose_moment(cl, {}, FrameClass::GLC), ClassViolation);
  ClusterSpec refl;
  refl.rel = {{0, 0}};
  EXPECT_THROW(compose_moment(refl, {}, FrameClass::GLC), ClassViolation);
  // A 2-cluster is not transitive, so it cannot root a K4 moment.
  EXPECT_THROW(compose_moment(cl, {}, FrameClass::K4C), ClassViolation);
}

TEST(Moment, ValidationFailures) {
  Moment m = single(FrameClass::WK4C);
  m.frame = DynamicFrame(2);
  EXPECT_EQ(validate_moment(m).failed, "rooted");
  m.frame = DynamicFrame(3, {{0, 1}, {0, 2}, {1, 2}, {0, 0}});
  m.root = 0;
  EXPECT_TRUE(validate_moment(m).ok);
  m.cls = FrameClass::GLC;
  EXPECT_EQ(validate_moment(m).failed, "class");
  m.frame = DynamicFrame(1, {}, std::vector<Point>{0});
  EXPECT_EQ(validate_moment(m).failed, "frame has function");
}

TEST(Story, Examples) {
  Story s0;
  s0.layers = {single(FrameClass::WK4C)};
  EXPECT_TRUE(validate_story(s0).ok);
  EXPECT_EQ(s0.duration(), 0U);

  Story s1;
  s1.layers = {single(FrameClass::WK4C), single(FrameClass::WK4C, {{"p", PointSet{0}}})};
  s1.maps = {{0}};
  EXPECT_TRUE(validate_story(s1).ok);
  const StoryModel sm = story_to_model(s1, FrameClass::WK4C);
  EXPECT_EQ(sm.model.function(), (std::vector<Point>{1, 1}));
  EXPECT_TRUE(model_check(sm.model, parse("X p"), 0).holds);
  EXPECT_EQ(sm.offsets, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(sm.layers.layer_of, (std::vector<std::size_t>{0, 1}));

  Story bad;
  bad.layers = {single(FrameClass::WK4C), compose_moment({}, {single(FrameClass::WK4C)}, FrameClass::WK4C)};
  bad.maps = {{1}};
  const auto v = validate_story(bad);
  EXPECT_FALSE(v.ok);
  EXPECT_EQ(v.failed, "root preserving");
  EXPECT_THROW(story_to_model(bad, FrameClass::WK4C), ClassViolation);

  Story short_map = s1;
  short_map.maps = {{}};
  EXPECT_EQ(validate_story(short_map).failed, "total map");
}

TEST(Story, WeakMonotonicityIsChecked) {
  // Layer 0: root 0 below leaf 1. Layer 1: root 0 below leaf 1.
  const Moment two = compose_moment({}, {single(FrameClass::K4C)}, FrameClass::K4C);
  Story s;
  s.layers = {two, two};
  s.maps = {{0, 0}};
  EXPECT_TRUE(validate_story(s).ok);
  const StoryModel sm = story_to_model(s, FrameClass::K4C);
  EXPECT_TRUE(function_properties(*sm.model.frame()).weakly_monotonic.holds);
  // Leaf to root while root goes to root is fine; root to leaf is not root preserving.
  s.maps = {{1, 0}};
  EXPECT_FALSE(validate_story(s).ok);
}

TEST(Story, LayeredTruthPreservation) {
  // Two-layer story mapped onto a reflexive point: Xp is only compared on
  // the last layer when the duration allows it.
  Story s;
  s.layers = {single(FrameClass::WK4C), single(FrameClass::WK4C, {{"p", PointSet{0}}})};
  s.maps = {{0}};
  const StoryModel sm = story_to_model(s, FrameClass::WK4C);
  Model n(DynamicFrame(2, {}, std::vector<Point>{1, 1}), {{"p", PointSet{1}}});
  const auto r = check_truth_preservation(sm.model, n, {0, 1}, {parse("X p"), parse("p")}, {}, sm.layers);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.formulas_checked, 2U);
}

}  // namespace
}  // namespace derivelog
