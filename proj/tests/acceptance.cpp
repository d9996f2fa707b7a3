// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "derivelog/error.hpp"
#include "derivelog/io.hpp"
#include "derivelog/search.hpp"
#include "derivelog/spaces.hpp"
#include "derivelog/transforms.hpp"
#include "support.hpp"

using namespace derivelog;
namespace dt = derivelog::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

// Relations on n <= 5 worlds as successor masks, bit v of succ[w] for w rel v.
using Succ = std::array<std::uint32_t, 5>;

Succ succ_of(std::size_t n, std::uint64_t code) {
  Succ s{};
  for (std::size_t w = 0; w < n; ++w) s[w] = static_cast<std::uint32_t>((code >> (w * n)) & ((1U << n) - 1));
  return s;
}

bool fast_weakly_transitive(std::size_t n, const Succ& s) {
  for (std::size_t w = 0; w < n; ++w) {
    std::uint32_t reach = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (s[w] >> v & 1U) reach |= s[v];
    reach &= ~(1U << w);
    if ((reach & ~s[w]) != 0) return false;
  }
  return true;
}

bool fast_transitive(std::size_t n, const Succ& s) {
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t v = 0; v < n; ++v)
      if ((s[w] >> v & 1U) && (s[v] & ~s[w]) != 0) return false;
  return true;
}

bool fast_irreflexive(std::size_t n, const Succ& s) {
  for (std::size_t w = 0; w < n; ++w)
    if (s[w] >> w & 1U) return false;
  return true;
}

DynamicFrame frame_of(std::size_t n, const Succ& s) {
  std::vector<std::pair<Point, Point>> rel;
  for (Point w = 0; w < n; ++w)
    for (Point v = 0; v < n; ++v)
      if (s[w] >> v & 1U) rel.emplace_back(w, v);
  return DynamicFrame(n, rel);
}

/// Calls fn on every relation on 1..max_n worlds accepted by `keep`.
void for_each_relation_upto(std::size_t max_n,
                            const std::function<bool(std::size_t, const Succ&)>& keep,
                            const std::function<void(const DynamicFrame&)>& fn) {
  for (std::size_t n = 1; n <= max_n; ++n) {
    const std::uint64_t total = std::uint64_t{1} << (n * n);
    for (std::uint64_t code = 0; code < total; ++code) {
      const Succ s = succ_of(n, code);
      if (keep(n, s)) fn(frame_of(n, s));
    }
  }
}

std::string count_str(std::size_t checked, std::size_t violations, const char* what) {
  return std::to_string(checked) + " " + what + ", " + std::to_string(violations) + " violations";
}

// 1. Every scheme of the class logic on every enumerated frame up to 4
// worlds. Relation-only schemes are checked once per relation since X-free
// formulas do not depend on the function.
Outcome soundness() {
  std::size_t frames = 0, checks = 0, violations = 0;
  for (FrameClass cls : {FrameClass::WK4C, FrameClass::K4C, FrameClass::GLC}) {
    const auto schemes = logic_axioms(cls);
    for (std::size_t n = 1; n <= 4; ++n) {
      std::vector<std::pair<Point, Point>> last_rel;
      bool have_rel = false;
      for_each_frame(n, cls, {true, false}, [&](const DynamicFrame& fr) {
        ++frames;
        const Model m(fr, {});
        const bool new_rel = !have_rel || fr.pairs() != last_rel;
        if (new_rel) {
          last_rel = fr.pairs();
          have_rel = true;
        }
        for (const auto& s : schemes) {
          if (next_depth(s.templ) == 0 && !new_rel) continue;
          ++checks;
          if (!check_scheme_validity(m, s).valid) ++violations;
        }
        return true;
      });
    }
  }
  return {violations == 0,
          std::to_string(frames) + " frames, " + count_str(checks, violations, "scheme checks")};
}

// 2. Countermodels separating the logics, re-verified pointwise.
Outcome separation() {
  std::vector<std::string> problems;
  auto verify = [&](const std::string& label, const Verdict& v, const Formula& f,
                    const std::function<bool(const Model&)>& shape) {
    if (v.kind != VerdictKind::CounterModel) {
      problems.push_back(label + ": " + to_string(v.kind));
      return;
    }
    const dt::NaiveEvaluator naive(*v.model->frame(), v.model->valuation());
    if (model_check(*v.model, f, v.point).holds || naive.eval(f)[v.point]) {
      problems.push_back(label + ": witness does not falsify");
    }
    if (!shape(*v.model)) problems.push_back(label + ": unexpected witness shape");
  };
  SearchBudget b;
  b.max_worlds = 4;
  const Formula four = axiom("4").templ, lob = axiom("L").templ, t = axiom("T").templ,
                c = axiom("C").templ;
  verify("4 in wK4C", valid_at_bound(four, FrameClass::WK4C, b), four, [](const Model& m) {
    const DynamicFrame& fr = *m.frame();
    return fr.size() == 2 && fr.related(0, 1) && fr.related(1, 0) && !fr.related(0, 0) &&
           !fr.related(1, 1);
  });
  verify("L in K4C", valid_at_bound(lob, FrameClass::K4C, b), lob,
         [](const Model& m) { return m.size() == 1 && m.frame()->related(0, 0); });
  verify("T in K4C", valid_at_bound(t, FrameClass::K4C, b), t,
         [](const Model& m) { return m.size() == 1 && !m.frame()->related(0, 0); });
  SearchBudget nf = b;
  nf.max_worlds = 2;
  nf.class_filter = false;
  verify("C unfiltered", valid_at_bound(c, FrameClass::WK4C, nf), c, [](const Model& m) {
    return m.size() == 2 && !function_properties(*m.frame()).weakly_monotonic.holds;
  });
  // The filtered search must not find the same failure.
  if (valid_at_bound(c, FrameClass::WK4C, b).kind != VerdictKind::ValidUpToBound) {
    problems.push_back("C in wK4C: countermodel inside the class");
  }
  std::string detail = "4/wK4C, L/K4C, T/K4C, C/unfiltered";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// 3. Frame and space bridge facts over every relation on at most 5 worlds.
Outcome bridge() {
  std::size_t dtau = 0, dtau_bad = 0, ctau = 0, ctau_bad = 0, scat = 0, scat_bad = 0, td = 0,
              td_bad = 0;
  // Derivative frames: d = downset iff irreflexive, closure = downset iff reflexive.
  for_each_relation_upto(5, fast_weakly_transitive, [&](const DynamicFrame& fr) {
    const std::size_t n = fr.size();
    const FiniteTopology top = alexandroff_from_frame(fr);
    bool d_eq = true, c_eq = true;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      const PointSet s = PointSet::from_mask(m);
      const PointSet down = downset(fr, s);
      if (cantor_derivative(top, s) != down) d_eq = false;
      if (closure(top, s) != down) c_eq = false;
    }
    bool reflexive = true;
    for (Point w = 0; w < n; ++w) reflexive = reflexive && fr.related(w, w);
    ++dtau;
    ++ctau;
    if (d_eq != dt::naive_irreflexive(fr)) ++dtau_bad;
    if (c_eq != reflexive) ++ctau_bad;
  });
  // Irreflexive frames: scattered iff converse well-founded.
  for_each_relation_upto(5, fast_irreflexive, [&](const DynamicFrame& fr) {
    ++scat;
    const bool scattered =
        is_scattered(DerivativeSpace::from_topology(alexandroff_from_frame(fr))).scattered;
    if (scattered != dt::naive_converse_well_founded(fr)) ++scat_bad;
  });
  // Transitive frames: T_D iff antisymmetric.
  for_each_relation_upto(5, fast_transitive, [&](const DynamicFrame& fr) {
    ++td;
    if (is_td(alexandroff_from_frame(fr)) != dt::naive_antisymmetric(fr)) ++td_bad;
  });
  const std::size_t bad = dtau_bad + ctau_bad + scat_bad + td_bad;
  return {bad == 0, "d=down " + count_str(dtau, dtau_bad, "frames") + "; c=down " +
                        count_str(ctau, ctau_bad, "frames") + "; scattered " +
                        count_str(scat, scat_bad, "frames") + "; T_D " +
                        count_str(td, td_bad, "frames")};
}

// 4. Tangles vanish on scattered spaces.
Outcome tangle_collapse() {
  std::size_t spaces = 0, families = 0, bad = 0;
  for_each_relation_upto(
      5,
      [](std::size_t n, const Succ& s) {
        if (!fast_irreflexive(n, s)) return false;
        // Acyclic: repeatedly strip worlds with no successors left.
        std::uint32_t alive = (1U << n) - 1;
        bool changed = true;
        while (changed) {
          changed = false;
          for (std::size_t w = 0; w < n; ++w) {
            if ((alive >> w & 1U) && (s[w] & alive) == 0) {
              alive &= ~(1U << w);
              changed = true;
            }
          }
        }
        return alive == 0;
      },
      [&](const DynamicFrame& fr) {
        const auto sp = DerivativeSpace::from_topology(alexandroff_from_frame(fr));
        if (!is_scattered(sp).scattered) ++bad;
        ++spaces;
        const std::uint64_t subsets = std::uint64_t{1} << fr.size();
        for (std::uint64_t a = 0; a < subsets; ++a) {
          for (std::uint64_t b = a; b < subsets; ++b) {
            std::vector<PointSet> fam{PointSet::from_mask(a)};
            if (b != a) fam.push_back(PointSet::from_mask(b));
            ++families;
            if (!tangled_derivative(sp, fam).empty()) ++bad;
          }
        }
      });
  const auto ind = DerivativeSpace::from_frame(DynamicFrame(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  const bool example = tangled_derivative(ind, {PointSet{0}, PointSet{1}}) == PointSet{0, 1};
  if (!example) ++bad;
  return {bad == 0, std::to_string(spaces) + " scattered spaces, " +
                        count_str(families, bad, "families") +
                        (example ? "; indiscrete {a,b} -> {a,b}" : "; indiscrete example wrong")};
}

std::vector<Formula> bounded_formulas(Rng& rng, std::size_t count) {
  std::vector<Formula> out;
  while (out.size() < count) {
    const Formula f = dt::random_formula(rng, 5);
    if (modal_depth(f) <= 3 && next_depth(f) <= 2) out.push_back(f);
  }
  return out;
}

// 5. Certificates for the doubling and the exact unwinding.
Outcome certificates() {
  Rng rng(5005);
  std::size_t inputs = 0, checks = 0, bad = 0;
  PMorphismOptions surj;
  surj.require_surjective = true;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const std::size_t size = 1 + i % 6;
    const auto formulas = bounded_formulas(rng, 20);
    const Model w = random_model(FrameClass::WK4C, size, mix_seed(1, i));
    const Projected p = oplus(w);
    ++inputs;
    ++checks;
    if (!check_dynamic_pmorphism(p.model, w, p.projection, surj).ok) ++bad;
    checks += formulas.size();
    bad += check_truth_preservation(p.model, w, p.projection, formulas, surj).violations.size();

    const Model g = random_model(FrameClass::GLC, size, mix_seed(2, i));
    const Unwound u = unwind(g);
    ++inputs;
    ++checks;
    if (!u.exact) ++bad;
    if (!check_dynamic_pmorphism(u.model, g, u.projection, surj).ok) ++bad;
    checks += formulas.size();
    bad += check_truth_preservation(u.model, g, u.projection, formulas, surj).violations.size();
  }
  return {bad == 0, std::to_string(inputs) + " constructions, " + count_str(checks, bad, "checks")};
}

// Every next-normal formula over atoms X^k p, X^k q (k <= 2) and F with at
// most `max_size` AST nodes.
std::vector<Formula> normal_formulas(std::size_t max_size) {
  std::vector<std::vector<Formula>> by_size(max_size + 1);
  for (const char* v : {"p", "q"}) {
    for (std::size_t k = 0; k <= 2; ++k) by_size[1 + k].push_back(Formula::next_pow(Formula::var(v), k));
  }
  by_size[1].push_back(Formula::bot());
  for (std::size_t s = 2; s <= max_size; ++s) {
    for (const auto& a : by_size[s - 1]) {
      by_size[s].push_back(Formula::neg(a));
      by_size[s].push_back(Formula::dia(a));
    }
    for (std::size_t l = 1; l + 1 < s; ++l) {
      for (const auto& a : by_size[l])
        for (const auto& b : by_size[s - 1 - l]) by_size[s].push_back(Formula::conj(a, b));
    }
  }
  std::vector<Formula> out;
  for (const auto& v : by_size) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// 6. The invertible construction.
Outcome invertibility() {
  std::size_t homeo = 0, homeo_bad = 0;
  for_each_relation_upto(4, fast_weakly_transitive, [&](const DynamicFrame& fr) {
    const auto sp = DerivativeSpace::from_frame(fr);
    for (std::size_t n = 1; n <= 3; ++n) {
      const Model m = power_system(sp, n, {});
      ++homeo;
      if (!check_homeomorphism(m.function(), m.space(), m.space(), CheckMode::exhaustive_up_to(12)).holds) {
        ++homeo_bad;
      }
    }
  });

  // Copy i of the power system reads the extended valuation i steps ahead:
  // (w,i) satisfies phi iff w satisfies the normal form of X^i phi. At
  // i = 0 this is the literal statement; the literal statement at i > 0 is
  // counted separately for information.
  const auto formulas = normal_formulas(6);
  Rng rng(6006);
  std::size_t npres = 0, npres_bad = 0, literal_i_gt0 = 0, literal_i_gt0_fail = 0;
  for_each_relation_upto(3, fast_weakly_transitive, [&](const DynamicFrame& fr) {
    const auto sp = DerivativeSpace::from_frame(fr);
    const std::size_t a = fr.size();
    for (std::size_t n = 1; n <= 3; ++n) {
      for (int trial = 0; trial < 4; ++trial) {
        ExtendedValuation ev;
        for (const char* v : {"p", "q"})
          for (std::size_t i = 0; i < 3; ++i) ev[{v, i}] = rng.subset(a);
        const Model m = power_system(sp, n, ev);
        for (const auto& f : formulas) {
          const PointSet lifted = truth_set(m, f);
          const PointSet literal = extended_truth_set(sp, ev, f);
          for (std::size_t i = 0; i < n; ++i) {
            if (next_depth(f) >= n - i) continue;
            const PointSet shifted =
                i == 0 ? literal : extended_truth_set(sp, ev, to_next_normal_form(Formula::next_pow(f, i)));
            bool ok = true, lit = true;
            for (Point w = 0; w < a; ++w) {
              const bool at = lifted.contains(static_cast<Point>(i * a + w));
              ok = ok && at == shifted.contains(w);
              lit = lit && at == literal.contains(w);
            }
            ++npres;
            if (!ok) ++npres_bad;
            if (i > 0) {
              ++literal_i_gt0;
              if (!lit) ++literal_i_gt0_fail;
            }
          }
        }
      }
    }
  });

  std::size_t nnf = 0, nnf_bad = 0;
  Rng frng(6007);
  for (std::uint64_t i = 0; i < 200; ++i) {
    const FrameClass cls = kAllClasses[3 + i % 3];
    const Model m = random_model(cls, 1 + i % 5, mix_seed(6, i));
    for (int k = 0; k < 25; ++k) {
      const Formula f = dt::random_formula(frng, 5);
      ++nnf;
      if (truth_set(m, f) != truth_set(m, to_next_normal_form(f))) ++nnf_bad;
    }
  }
  const std::size_t bad = homeo_bad + npres_bad + nnf_bad;
  return {bad == 0,
          "homeomorphism " + count_str(homeo, homeo_bad, "systems") + "; depth preservation " +
              count_str(npres, npres_bad, "cases") + " over " + std::to_string(formulas.size()) +
              " normal formulas (unshifted reading at i>0 differs in " +
              std::to_string(literal_i_gt0_fail) + "/" + std::to_string(literal_i_gt0) +
              ")" + "; normal form " + count_str(nnf, nnf_bad, "checks")};
}

SearchBudget corpus_budget(std::size_t jobs) {
  SearchBudget b;
  b.max_worlds = 4;
  b.max_story_branching = 2;
  b.jobs = jobs;
  return b;
}

std::vector<CorpusQuery> load_corpus() {
  std::istringstream in(read_file(std::string(DERIVELOG_TEST_DATA) + "/corpus.tsv"));
  return parse_corpus(in);
}

// 7. Frame search and story search agree on the corpus.
Outcome fmp_consistency() {
  const auto queries = load_corpus();
  const SearchBudget b = corpus_budget(1);
  std::size_t disagree = 0, unverified = 0, unexpected = 0;
  std::string first;
  for (const auto& q : queries) {
    const CorpusOutcome o = run_corpus_query(q, b);
    if (!o.agree) {
      ++disagree;
      if (first.empty()) first = "line " + std::to_string(q.line);
    }
    if (!o.as_expected) ++unexpected;
    for (const Verdict* v : {&o.frames, &o.story}) {
      if (!v->positive()) continue;
      const Formula target = q.validity ? Formula::neg(q.formula) : q.formula;
      const dt::NaiveEvaluator naive(*v->model->frame(), v->model->valuation());
      if (!model_check(*v->model, target, v->point).holds || !naive.eval(target)[v->point]) {
        ++unverified;
      }
    }
  }
  std::string detail = std::to_string(queries.size()) + " queries, " + std::to_string(disagree) +
                       " disagreements, " + std::to_string(unverified) + " unverified witnesses, " +
                       std::to_string(unexpected) + " unexpected verdicts";
  if (!first.empty()) detail += " (first at " + first + ")";
  return {queries.size() == 50 && disagree == 0 && unverified == 0, detail};
}

std::string verdict_stream(std::size_t jobs) {
  std::ostringstream out;
  const SearchBudget b = corpus_budget(jobs);
  for (const auto& q : load_corpus()) {
    const CorpusOutcome o = run_corpus_query(q, b);
    out << verdict_to_json(o.frames, q.formula, q.cls).dump() << '\n'
        << verdict_to_json(o.story, q.formula, q.cls).dump() << '\n';
  }
  for (FrameClass cls : {FrameClass::WK4C, FrameClass::K4H}) {
    for (bool broken : {false, true}) {
      RandomModelOptions ro;
      ro.broken_repair = broken;
      const FuzzReport r = soundness_fuzz(cls, 150, 8008, 5, ro, jobs);
      out << to_string(cls) << ' ' << r.trials << ' ' << r.scheme_checks;
      for (const auto& v : r.violations) out << ' ' << v.trial << ':' << v.scheme << ':' << v.point;
      out << '\n';
    }
  }
  return out.str();
}

// 8. Identical output regardless of worker count.
Outcome determinism() {
  const std::string ref = verdict_stream(1);
  std::size_t runs = 1, differ = 0;
  for (std::size_t jobs : {1U, 2U, 4U}) {
    ++runs;
    if (verdict_stream(jobs) != ref) ++differ;
  }
  return {differ == 0, std::to_string(runs) + " runs (jobs 1,1,2,4), " + std::to_string(differ) +
                           " differing streams, " + std::to_string(ref.size()) + " bytes each"};
}

}  // namespace

int main() {
  report(1, "soundness of the class axioms (n<=4, wK4C/K4C/GLC)", soundness);
  report(2, "axiom separation countermodels", separation);
  report(3, "frame/space bridge (|W|<=5)", bridge);
  report(4, "tangle collapse on scattered spaces (|W|<=5)", tangle_collapse);
  report(5, "doubling and unwinding certificates (200 inputs)", certificates);
  report(6, "invertible systems", invertibility);
  report(7, "frame/story search agreement on the corpus", fmp_consistency);
  report(8, "determinism across worker counts", determinism);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
