#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <CLI11.hpp>

#include "derivelog/error.hpp"
#include "derivelog/formula.hpp"
#include "derivelog/frames.hpp"
#include "derivelog/io.hpp"
#include "derivelog/search.hpp"
#include "derivelog/semantics.hpp"
#include "derivelog/spaces.hpp"
#include "derivelog/transforms.hpp"

namespace derivelog::cli {

namespace {

struct Options {
  bool pretty = false;
  std::optional<std::string> config;

  std::optional<std::string> formula;
  std::optional<std::string> model;
  std::optional<std::string> model2;
  std::optional<std::string> space;
  std::optional<std::string> ext;
  std::optional<std::string> sets;
  std::optional<std::string> set;
  std::optional<std::string> file;
  std::optional<std::string> cls;
  std::optional<std::string> expect;
  std::optional<std::size_t> point;
  std::optional<std::size_t> depth;
  std::size_t copies = 1;

  std::optional<std::size_t> max_worlds;
  std::optional<std::size_t> branching;
  std::optional<std::string> valuations;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> duration;
  std::optional<long long> time_limit_ms;
  bool no_class_filter = false;
  bool no_iso = false;
  bool validity = false;

  std::size_t trials = 100;
  std::size_t max_size = 6;
  bool broken_repair = false;
};

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  void emit(const Json& j) const { out_ << (o_.pretty ? j.dump(2) : j.dump()) << '\n'; }

  std::ostream& err() const { return err_; }
  const Options& opts() const { return o_; }

  Formula formula() const {
    if (!o_.formula) throw InputError("--formula is required");
    return parse(*o_.formula);
  }

  FrameClass frame_class() const {
    if (!o_.cls) throw InputError("--class is required");
    return parse_frame_class(*o_.cls);
  }

  LoadedModel load_model(const std::optional<std::string>& path, const char* flag) const {
    if (!path) throw InputError(std::string(flag) + " is required");
    return model_from_json(read_json_file(*path));
  }

  DerivativeSpace load_space() const {
    const auto& path = o_.space ? o_.space : o_.model;
    if (!path) throw InputError("--space is required");
    return space_from_json(read_json_file(*path));
  }

  SearchBudget budget() const {
    Config cfg;
    if (o_.config) {
      std::istringstream in(read_file(*o_.config));
      cfg = parse_config(in);
    }
    SearchBudget b;
    auto number = [&](const std::string& key) -> std::optional<unsigned long long> {
      auto it = cfg.find(key);
      if (it == cfg.end()) return std::nullopt;
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
      } catch (const std::exception&) {
        throw InputError("config key '" + key + "' needs a non-negative integer");
      }
    };
    static const std::set<std::string> known = {"max_worlds", "branching", "valuations", "seed",
                                                "jobs", "time_limit_ms", "duration"};
    for (const auto& [key, value] : cfg) {
      if (!known.contains(key)) throw InputError("unknown config key '" + key + "'");
    }
    if (auto v = number("max_worlds")) b.max_worlds = *v;
    if (auto v = number("branching")) b.max_story_branching = *v;
    if (auto v = number("seed")) b.seed = *v;
    if (auto v = number("jobs")) b.jobs = *v;
    if (auto v = number("time_limit_ms")) b.time_limit = std::chrono::milliseconds(*v);
    if (auto v = number("duration")) b.story_duration = *v;
    if (auto it = cfg.find("valuations"); it != cfg.end()) set_valuations(b, it->second);

    if (o_.max_worlds) b.max_worlds = *o_.max_worlds;
    if (o_.branching) b.max_story_branching = *o_.branching;
    if (o_.seed) b.seed = *o_.seed;
    if (o_.jobs) b.jobs = *o_.jobs;
    if (o_.time_limit_ms) b.time_limit = std::chrono::milliseconds(*o_.time_limit_ms);
    if (o_.duration) b.story_duration = *o_.duration;
    if (o_.valuations) set_valuations(b, *o_.valuations);
    b.class_filter = !o_.no_class_filter;
    b.prune_isomorphic = !o_.no_iso;
    b.validate();
    return b;
  }

  /// Returns kUnexpected when --expect is given and differs from `actual`.
  int expectation(const std::string& actual, std::initializer_list<const char*> allowed) const {
    if (!o_.expect) return kAnswered;
    bool known = false;
    for (const char* a : allowed) known = known || *o_.expect == a;
    if (!known) throw InputError("--expect '" + *o_.expect + "' does not apply here");
    if (*o_.expect == actual) return kAnswered;
    err_ << "expected " << *o_.expect << ", got " << actual << '\n';
    return kUnexpected;
  }

 private:
  static void set_valuations(SearchBudget& b, const std::string& text) {
    if (text == "exhaustive") {
      b.sampled_valuations.reset();
      return;
    }
    const std::string prefix = "sampled:";
    if (text.rfind(prefix, 0) == 0) {
      try {
        std::size_t used = 0;
        const std::string k = text.substr(prefix.size());
        const unsigned long long v = std::stoull(k, &used);
        if (used == k.size() && v > 0) {
          b.sampled_valuations = v;
          return;
        }
      } catch (const std::exception&) {
      }
    }
    throw InputError("valuations must be 'exhaustive' or 'sampled:K' with K > 0");
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
};

Json flag_json(const Flag& f) {
  Json j;
  j["holds"] = f.holds;
  j["witness"] = f.witness;
  return j;
}

Json points_json(const std::vector<Point>& v) {
  Json j = Json::array();
  for (Point p : v) j.push_back(p);
  return j;
}

Json subset_check_json(const SubsetCheck& c) {
  Json j;
  j["holds"] = c.holds;
  j["witness"] = c.witness ? point_set_to_json(*c.witness) : Json(nullptr);
  j["checked"] = c.checked;
  j["exhaustive"] = c.exhaustive;
  return j;
}

/// Strongest class the model's frame belongs to, invertible classes first.
std::optional<FrameClass> strongest_class(const Model& m) {
  if (m.frame() == nullptr) return std::nullopt;
  DynamicFrame fr = *m.frame();
  fr.set_function(m.function());
  for (FrameClass c : {FrameClass::GLH, FrameClass::K4H, FrameClass::WK4H, FrameClass::GLC,
                       FrameClass::K4C, FrameClass::WK4C}) {
    if (in_class(fr, c)) return c;
  }
  return std::nullopt;
}

Json pmorphism_json(const PMorphismVerdict& v) {
  Json j;
  j["pmorphism"] = v.ok;
  if (!v.ok) {
    j["failed"] = v.failed;
    j["witness"] = points_json(v.witness);
    if (!v.variable.empty()) j["variable"] = v.variable;
  }
  return j;
}

int cmd_parse(const Runner& r) {
  const Formula f = r.formula();
  Json j;
  j["formula"] = render(f);
  j["size"] = formula_size(f);
  j["modal_depth"] = modal_depth(f);
  j["next_depth"] = next_depth(f);
  j["variables"] = variables(f);
  j["contains_tangle"] = contains_tangle(f);
  j["next_normal"] = is_next_normal(f);
  r.emit(j);
  return kAnswered;
}

int cmd_nnf(const Runner& r) {
  const Formula f = r.formula();
  const Formula nf = to_next_normal_form(f);
  Json j;
  j["formula"] = render(f);
  j["normal_form"] = render(nf);
  j["next_depth"] = next_depth(f);
  j["normal_next_depth"] = next_depth(nf);
  r.emit(j);
  return kAnswered;
}

int cmd_check(const Runner& r) {
  const LoadedModel lm = r.load_model(r.opts().model, "--model");
  const Formula f = r.formula();
  const auto at = r.opts().point;
  const ModelCheckResult res = at ? model_check(lm.model, f, static_cast<Point>(*at))
                                  : model_check(lm.model, f);
  for (const auto& v : res.missing_variables) {
    r.err() << "warning: variable '" << v << "' has no valuation; treated as empty\n";
  }
  Json j;
  j["formula"] = render(f);
  if (at) j["point"] = *at;
  j["holds"] = res.holds;
  j["truth"] = point_set_to_json(res.truth);
  j["falsifying"] = point_set_to_json(res.falsifying);
  j["missing_variables"] = res.missing_variables;
  r.emit(j);
  if (!r.opts().expect) return kAnswered;
  const std::string& e = *r.opts().expect;
  if (e == "sat" || e == "unsat") {
    return r.expectation(res.truth.empty() ? "unsat" : "sat", {"sat", "unsat"});
  }
  return r.expectation(res.holds ? "valid" : "counter", {"valid", "counter"});
}

int cmd_props(const Runner& r) {
  const auto& path = r.opts().model ? r.opts().model : r.opts().space;
  if (!path) throw InputError("--model or --space is required");
  const Json input = read_json_file(*path);
  Json j;
  if (input.contains("nbhd") || input.contains("opens") || input.contains("rho")) {
    const DerivativeSpace sp = space_from_json(input);
    j["worlds"] = sp.size();
    const auto ax = validate_derivative_axioms(sp, CheckMode::exhaustive_up_to(sp.size()));
    j["derivative_axioms"] = {{"empty", subset_check_json(ax.empty)},
                              {"additive", subset_check_json(ax.additive)},
                              {"weak_idempotence", subset_check_json(ax.weak_idem)}};
    const ScatteredReport sc = is_scattered(sp);
    j["scattered"] = sc.scattered;
    if (const FiniteTopology* top = sp.topology()) j["td"] = is_td(*top);
    r.emit(j);
    return kAnswered;
  }
  const DynamicFrame fr = frame_from_json(input);
  j["worlds"] = fr.size();
  const RelationReport rr = relation_properties(fr);
  j["relation"] = {{"weakly_transitive", flag_json(rr.weakly_transitive)},
                   {"transitive", flag_json(rr.transitive)},
                   {"irreflexive", flag_json(rr.irreflexive)},
                   {"antisymmetric", flag_json(rr.antisymmetric)},
                   {"converse_well_founded", flag_json(rr.converse_well_founded)},
                   {"tree_like", flag_json(rr.tree_like)}};
  Json clusters = Json::array();
  for (const auto& c : derivelog::clusters(fr)) clusters.push_back(point_set_to_json(c));
  j["clusters"] = clusters;
  j["static_logics"] = {{"wK4", satisfies_static_logic(fr, StaticLogic::WK4)},
                        {"K4", satisfies_static_logic(fr, StaticLogic::K4)},
                        {"GL", satisfies_static_logic(fr, StaticLogic::GL)}};
  if (fr.has_function()) {
    const FunctionReport fp = function_properties(fr);
    j["function"] = {{"weakly_monotonic", flag_json(fp.weakly_monotonic)},
                     {"monotonic", flag_json(fp.monotonic)},
                     {"persistent", flag_json(fp.persistent)}};
    Json classes;
    for (FrameClass c : kAllClasses) classes[to_string(c)] = in_class(fr, c);
    j["classes"] = classes;
    if (r.opts().cls) {
      const FrameClass cls = r.frame_class();
      const Model m(fr, valuation_from_json(input, fr.size()));
      Json axioms = Json::array();
      bool all_valid = true;
      for (const auto& s : logic_axioms(cls)) {
        const std::size_t bits = fr.size() * variables(s.templ).size();
        const ValuationMode mode = bits <= kSchemeBudgetBits
                                       ? ValuationMode::all()
                                       : ValuationMode::sampled(4096, r.opts().seed.value_or(0));
        const SchemeVerdict sv = check_scheme_validity(m, s, mode);
        all_valid = all_valid && sv.valid;
        Json a;
        a["scheme"] = s.name;
        a["valid"] = sv.valid;
        a["assignments_checked"] = sv.assignments_checked;
        a["exhaustive"] = sv.exhaustive;
        if (sv.counter_point) a["counter_point"] = *sv.counter_point;
        if (sv.counter_assignment) {
          Json ca;
          for (const auto& [name, set] : *sv.counter_assignment) ca[name] = point_set_to_json(set);
          a["counter_assignment"] = ca;
        }
        axioms.push_back(a);
      }
      j["class"] = to_string(cls);
      j["axioms"] = axioms;
      r.emit(j);
      return r.expectation(all_valid ? "valid" : "counter", {"valid", "counter"});
    }
  } else {
    j["function"] = nullptr;
  }
  r.emit(j);
  return kAnswered;
}

int cmd_search(const Runner& r, const std::string& which) {
  const Formula f = r.formula();
  const FrameClass cls = r.frame_class();
  const SearchBudget b = r.budget();
  Verdict v;
  if (which == "sat") {
    v = sat_search(f, cls, b);
  } else if (which == "valid") {
    v = valid_at_bound(f, cls, b);
  } else if (r.opts().validity) {
    v = story_valid_at_bound(f, cls, b);
  } else {
    v = story_search(f, cls, b);
  }
  r.emit(verdict_to_json(v, f, cls));
  if (!v.positive()) {
    r.err() << "note: " << to_string(v.kind)
            << " is a bounded result, not a proof of "
            << (v.kind == VerdictKind::UnsatUpToBound ? "unsatisfiability" : "validity") << '\n';
  }
  const std::string word = verdict_word(v);
  if (which == "valid" || (which == "story-sat" && r.opts().validity)) {
    return r.expectation(word, {"valid", "counter"});
  }
  return r.expectation(word, {"sat", "unsat"});
}

int cmd_transform(const Runner& r, const std::string& which) {
  Json j;
  if (which == "oplus") {
    const LoadedModel lm = r.load_model(r.opts().model, "--model");
    const Projected p = oplus(lm.model);
    PMorphismOptions opts;
    opts.require_surjective = true;
    j["model"] = model_to_json(p.model, strongest_class(p.model), "oplus");
    j["projection"] = points_json(p.projection);
    Json cert = pmorphism_json(check_dynamic_pmorphism(p.model, lm.model, p.projection, opts));
    cert["surjective"] = true;
    j["certificate"] = cert;
  } else if (which == "unwind") {
    const LoadedModel lm = r.load_model(r.opts().model, "--model");
    std::optional<Formula> query;
    if (r.opts().formula) query = r.formula();
    const Unwound u = unwind(lm.model, r.opts().depth, query);
    PMorphismOptions opts;
    opts.require_surjective = true;
    opts.skip_back = u.frontier;
    j["model"] = model_to_json(u.model, strongest_class(u.model), "unwind");
    j["projection"] = points_json(u.projection);
    Json seqs = Json::array();
    for (const auto& s : u.sequences) seqs.push_back(points_json(s));
    j["sequences"] = seqs;
    j["exact"] = u.exact;
    j["depth_bound"] = u.depth_bound;
    j["frontier"] = point_set_to_json(u.frontier);
    j["certificate"] = pmorphism_json(check_dynamic_pmorphism(u.model, lm.model, u.projection, opts));
  } else if (which == "power") {
    const DerivativeSpace sp = r.load_space();
    if (!r.opts().ext) throw InputError("--ext is required");
    const ExtendedValuation ev = extended_valuation_from_json(read_json_file(*r.opts().ext));
    for (const auto& [key, set] : ev) {
      if (!set.is_subset_of(sp.all())) {
        throw InputError("extended valuation of '" + key.first + "' mentions unknown point");
      }
    }
    const Model m = power_system(sp, r.opts().copies, ev);
    j["model"] = model_to_json(m, strongest_class(m), "power");
    const CheckMode mode = m.size() <= CheckMode{}.cap ? CheckMode::exhaustive_up_to()
                                                       : CheckMode::sampled(1024, 0);
    j["certificate"] = {{"homeomorphism",
                         subset_check_json(check_homeomorphism(m.function(), m.space(), m.space(), mode))}};
  } else {
    const LoadedModel a = r.load_model(r.opts().model, "--model");
    const LoadedModel b = r.load_model(r.opts().model2, "--with");
    const DerivativeSpace sp = sum(a.model.space(), b.model.space());
    std::vector<Point> func = a.model.function();
    const auto off = static_cast<Point>(a.model.size());
    for (Point x : b.model.function()) func.push_back(off + x);
    Valuation val = a.model.valuation();
    for (const auto& [name, set] : b.model.valuation()) {
      PointSet& target = val[name];
      set.for_each([&](Point x) { target.insert(off + x); });
    }
    const Model m(sp, std::move(func), std::move(val));
    j["model"] = model_to_json(m, strongest_class(m), "sum");
  }
  r.emit(j);
  return kAnswered;
}

int cmd_topo(const Runner& r, const std::string& which) {
  const DerivativeSpace sp = r.load_space();
  Json j;
  if (which == "scattered") {
    const ScatteredReport rep = is_scattered(sp);
    j["scattered"] = rep.scattered;
    j["witness"] = point_set_to_json(rep.witness);
  } else if (which == "td") {
    if (const FiniteTopology* top = sp.topology()) {
      j["td"] = is_td(*top);
    } else if (const DynamicFrame* fr = sp.frame()) {
      j["td"] = is_td(alexandroff_from_frame(*fr));
    } else {
      throw InputError("td needs a topology or a frame");
    }
  } else if (which == "tangle") {
    if (!r.opts().sets) throw InputError("--sets is required");
    Json sets;
    try {
      sets = Json::parse(*r.opts().sets);
    } catch (const Json::parse_error&) {
      throw InputError("--sets must be a JSON array of id lists");
    }
    if (!sets.is_array() || sets.empty()) throw InputError("--sets must be a nonempty array");
    std::vector<PointSet> family;
    for (const auto& s : sets) family.push_back(point_set_from_json(s, sp.size()));
    j["tangle"] = point_set_to_json(tangled_derivative(sp, family));
  } else if (which == "derive") {
    if (!r.opts().set) throw InputError("--set is required");
    Json set;
    try {
      set = Json::parse(*r.opts().set);
    } catch (const Json::parse_error&) {
      throw InputError("--set must be a JSON array of ids");
    }
    const PointSet s = point_set_from_json(set, sp.size());
    j["set"] = point_set_to_json(s);
    j["rho"] = point_set_to_json(sp.rho(s));
    j["closure"] = point_set_to_json(closure(sp, s));
    j["co_derivative"] = point_set_to_json(co_derivative(sp, s));
    j["interior"] = point_set_to_json(interior(sp, s));
  } else {
    const DynamicFrame* fr = sp.frame();
    if (fr == nullptr) throw InputError("from-frame needs a relational input");
    const FiniteTopology top = alexandroff_from_frame(*fr);
    j = space_to_json(DerivativeSpace::from_topology(top));
    j["td"] = is_td(top);
  }
  r.emit(j);
  return kAnswered;
}

int cmd_fuzz(const Runner& r) {
  const FrameClass cls = r.frame_class();
  RandomModelOptions ro;
  ro.broken_repair = r.opts().broken_repair;
  const std::size_t jobs = r.opts().jobs.value_or(1);
  if (r.opts().max_size == 0) throw InputError("--max-size must be positive");
  if (jobs == 0) throw InputError("--jobs must be positive");
  const FuzzReport rep =
      soundness_fuzz(cls, r.opts().trials, r.opts().seed.value_or(0), r.opts().max_size, ro, jobs);
  Json j;
  j["class"] = to_string(cls);
  j["trials"] = rep.trials;
  j["scheme_checks"] = rep.scheme_checks;
  Json vs = Json::array();
  for (const auto& v : rep.violations) {
    vs.push_back({{"trial", v.trial}, {"size", v.size}, {"scheme", v.scheme}, {"point", v.point}});
  }
  j["violations"] = vs;
  r.emit(j);
  const std::string actual = rep.violations.empty() ? "valid" : "counter";
  if (!r.opts().expect) {
    if (actual == "valid") return kAnswered;
    r.err() << rep.violations.size() << " axiom violations\n";
    return kUnexpected;
  }
  return r.expectation(actual, {"valid", "counter"});
}

int cmd_corpus(const Runner& r) {
  if (!r.opts().file) throw InputError("--file is required");
  std::istringstream in(read_file(*r.opts().file));
  const auto queries = parse_corpus(in);
  const SearchBudget b = r.budget();
  std::size_t agree = 0;
  std::size_t expected = 0;
  for (const auto& q : queries) {
    const CorpusOutcome o = run_corpus_query(q, b);
    agree += o.agree ? 1 : 0;
    expected += o.as_expected ? 1 : 0;
    Json j;
    j["line"] = q.line;
    j["class"] = to_string(q.cls);
    j["mode"] = q.validity ? "valid" : "sat";
    j["formula"] = render(q.formula);
    j["expected"] = q.expected;
    j["frames"] = verdict_to_json(o.frames, q.formula, q.cls);
    j["story"] = verdict_to_json(o.story, q.formula, q.cls);
    j["agree"] = o.agree;
    j["as_expected"] = o.as_expected;
    r.emit(j);
  }
  Json s;
  s["summary"] = {{"queries", queries.size()}, {"agree", agree}, {"as_expected", expected}};
  r.emit(s);
  return agree == queries.size() && expected == queries.size() ? kAnswered : kUnexpected;
}

void add_common(CLI::App* c, Options& o) {
  c->add_flag("--pretty", o.pretty, "Indented JSON output");
  c->add_option("--config", o.config, "key=value file with default budgets");
}

void add_budget(CLI::App* c, Options& o) {
  c->add_option("--max-worlds", o.max_worlds, "Largest frame size searched");
  c->add_option("--branching", o.branching, "Story moment branching bound");
  c->add_option("--valuations", o.valuations, "exhaustive | sampled:K");
  c->add_option("--seed", o.seed, "Seed for sampled valuations");
  c->add_option("--jobs", o.jobs, "Worker threads");
  c->add_option("--duration", o.duration, "Story duration (at least the next-depth)");
  c->add_option("--time-limit-ms", o.time_limit_ms, "Wall-clock limit; 0 for none");
  c->add_flag("--no-class-filter", o.no_class_filter, "Scan every relation and function");
  c->add_flag("--no-iso", o.no_iso, "Disable isomorphism pruning");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Bounded model checking and search for dynamic derivative logics", "derivelog"};
  app.require_subcommand(1);

  auto* parse_cmd = app.add_subcommand("parse", "Parse and print a formula");
  auto* nnf_cmd = app.add_subcommand("nnf", "Next-normal form of a formula");
  auto* check_cmd = app.add_subcommand("check", "Evaluate a formula on a model");
  auto* props_cmd = app.add_subcommand("props", "Frame, function and space properties");
  auto* sat_cmd = app.add_subcommand("sat", "Bounded satisfiability by frame enumeration");
  auto* valid_cmd = app.add_subcommand("valid", "Bounded validity by frame enumeration");
  auto* story_cmd = app.add_subcommand("story-sat", "Bounded satisfiability over story-shaped models");
  auto* transform_cmd = app.add_subcommand("transform", "Model constructions");
  auto* topo_cmd = app.add_subcommand("topo", "Topological operations on finite spaces");
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Seeded soundness fuzzing of the class axioms");
  auto* corpus_cmd = app.add_subcommand("corpus", "Run a regression corpus");

  for (auto* c : {parse_cmd, nnf_cmd, check_cmd, sat_cmd, valid_cmd, story_cmd}) {
    c->add_option("--formula", o.formula, "Formula text")->required();
  }
  for (auto* c : {check_cmd, props_cmd}) {
    c->add_option("--model", o.model, "Model JSON file");
  }
  check_cmd->add_option("--point", o.point, "Evaluate at this point only");
  props_cmd->add_option("--space", o.space, "Space JSON file");
  props_cmd->add_option("--class", o.cls, "Check the axioms of this class");
  props_cmd->add_option("--seed", o.seed, "Seed for sampled scheme checks");
  for (auto* c : {check_cmd, props_cmd, sat_cmd, valid_cmd, story_cmd, fuzz_cmd}) {
    c->add_option("--expect", o.expect, "sat | unsat | valid | counter");
  }
  for (auto* c : {sat_cmd, valid_cmd, story_cmd, fuzz_cmd}) {
    c->add_option("--class", o.cls, "wK4C | K4C | GLC | wK4H | K4H | GLH")->required();
  }
  for (auto* c : {sat_cmd, valid_cmd, story_cmd, corpus_cmd}) add_budget(c, o);
  story_cmd->add_flag("--validity", o.validity, "Search for a counter-story instead");
  corpus_cmd->add_option("--file", o.file, "Corpus file")->required();

  std::string transform_kind;
  const std::pair<const char*, const char*> transforms[] = {
      {"oplus", "Replace each reflexive point by an irreflexive 2-cluster"},
      {"unwind", "Unwind into increasing sequences"},
      {"power", "Stack copies of a space with a shift map"},
      {"sum", "Disjoint sum of two models"}};
  for (const auto& [kind, help] : transforms) {
    auto* c = transform_cmd->add_subcommand(kind, help);
    c->callback([&transform_kind, kind] { transform_kind = kind; });
    add_common(c, o);
    if (std::string(kind) == "power") {
      c->add_option("--space", o.space, "Space JSON file")->required();
      c->add_option("--copies", o.copies, "Number of copies")->required();
      c->add_option("--ext", o.ext, "Extended valuation JSON file")->required();
    } else {
      c->add_option("--model", o.model, "Model JSON file")->required();
    }
    if (std::string(kind) == "unwind") {
      c->add_option("--depth", o.depth, "Sequence length bound");
      c->add_option("--formula", o.formula, "Query formula for the automatic bound");
    }
    if (std::string(kind) == "sum") c->add_option("--with", o.model2, "Second model")->required();
  }
  transform_cmd->require_subcommand(1);

  std::string topo_kind;
  const std::pair<const char*, const char*> topo_ops[] = {
      {"scattered", "Scatteredness with a dense-in-itself witness"},
      {"td", "T_D test"},
      {"tangle", "Tangled derivative of a family of sets"},
      {"derive", "Derivative, closure and interior of a set"},
      {"from-frame", "Up-set topology of a frame"}};
  for (const auto& [kind, help] : topo_ops) {
    auto* c = topo_cmd->add_subcommand(kind, help);
    c->callback([&topo_kind, kind] { topo_kind = kind; });
    add_common(c, o);
    c->add_option("--space", o.space, "Space JSON file")->required();
    if (std::string(kind) == "tangle") c->add_option("--sets", o.sets, "JSON array of id lists")->required();
    if (std::string(kind) == "derive") c->add_option("--set", o.set, "JSON array of ids")->required();
  }
  topo_cmd->require_subcommand(1);

  fuzz_cmd->add_option("--trials", o.trials, "Number of random models");
  fuzz_cmd->add_option("--seed", o.seed, "Base seed");
  fuzz_cmd->add_option("--max-size", o.max_size, "Largest random model");
  fuzz_cmd->add_option("--jobs", o.jobs, "Worker threads");
  fuzz_cmd->add_flag("--broken-repair", o.broken_repair, "Skip function repair (harness self-test)");

  for (auto* c : app.get_subcommands([](CLI::App*) { return true; })) {
    if (c != transform_cmd && c != topo_cmd) add_common(c, o);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kAnswered;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kAnswered;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  const Runner r(o, out, err);
  try {
    if (parse_cmd->parsed()) return cmd_parse(r);
    if (nnf_cmd->parsed()) return cmd_nnf(r);
    if (check_cmd->parsed()) return cmd_check(r);
    if (props_cmd->parsed()) return cmd_props(r);
    if (sat_cmd->parsed()) return cmd_search(r, "sat");
    if (valid_cmd->parsed()) return cmd_search(r, "valid");
    if (story_cmd->parsed()) return cmd_search(r, "story-sat");
    if (transform_cmd->parsed()) return cmd_transform(r, transform_kind);
    if (topo_cmd->parsed()) return cmd_topo(r, topo_kind);
    if (fuzz_cmd->parsed()) return cmd_fuzz(r);
    if (corpus_cmd->parsed()) return cmd_corpus(r);
  } catch (const BudgetExceeded& e) {
    Json j;
    j["verdict"] = "BudgetExceeded";
    j["message"] = e.what();
    j["completed_size"] = e.completed_size();
    j["frames_scanned"] = e.frames_scanned();
    r.emit(j);
    err << "budget exceeded: " << e.what() << '\n';
    return kBudgetExceeded;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  err << "no command given\n";
  return kInputError;
}

}  // namespace derivelog::cli
