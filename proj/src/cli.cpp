#include "coarse/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "coarse/bernoulli.hpp"
#include "coarse/car.hpp"
#include "coarse/errors.hpp"
#include "coarse/hypergraph.hpp"
#include "coarse/io.hpp"
#include "coarse/missing.hpp"
#include "coarse/procedural.hpp"

namespace coarse::cli {

namespace {

using nlohmann::json;

constexpr int kExitHolds = 0;
constexpr int kExitFails = 1;
constexpr int kExitUndecided = 2;
constexpr int kExitInputError = 3;

struct Options {
  std::string format = "text";
  size_t max_covers = 1000000;
  size_t max_gamma = 1000000;
  size_t max_states = 16;
};

/// One structured report: a verdict line, witness/certificate sections with
/// exact rationals, then provenance. Rendering is byte-deterministic.
struct Report {
  std::string command;
  std::string file;
  std::string verdict;
  std::vector<std::pair<std::string, std::vector<std::string>>> sections;
  json details = json::object();
  std::optional<uint64_t> seed;

  void section(const std::string& title, std::vector<std::string> lines) {
    sections.emplace_back(title, std::move(lines));
  }

  void print(std::ostream& out, const std::string& format) const {
    if (format == "json") {
      json doc;
      doc["command"] = command;
      doc["verdict"] = verdict;
      if (details.contains("witness")) doc["witness"] = details["witness"];
      if (details.contains("certificate")) doc["certificate"] = details["certificate"];
      doc["details"] = details;
      if (seed) doc["seed"] = *seed;
      out << doc.dump(2) << "\n";
      return;
    }
    out << "verdict: " << verdict << "\n";
    for (const auto& [title, lines] : sections) {
      out << title << ":\n";
      for (const auto& line : lines) out << "  " << line << "\n";
    }
    out << "provenance:\n";
    out << "  command: " << command << "\n";
    if (!file.empty()) out << "  file: " << file << "\n";
    if (seed) out << "  seed: " << *seed << "\n";
  }
};

std::string state_name(const StateSpace& space, size_t x) { return space.label(x); }

json rat_json(const Rat& r) { return rat_to_string(r); }

json posterior_json(const StateSpace& space, const std::map<size_t, Rat>& table) {
  json out = json::object();
  for (const auto& [x, p] : table) out[space.label(x)] = rat_json(p);
  return out;
}

void require_states_within(const StateSpace& space, const Options& opt) {
  if (space.size() > opt.max_states)
    throw CapExceeded("state space larger than --max-states (" + std::to_string(opt.max_states) +
                      "); raise the cap to run this exhaustive search");
}

CoarseDistribution induced_for_check(const ParsedModel& parsed, const Options& opt) {
  if (std::holds_alternative<TabularSequentialModel>(parsed.model))
    return induce_tabular(std::get<TabularSequentialModel>(parsed.model), {opt.max_gamma});
  if (std::holds_alternative<BernoulliModel>(parsed.model))
    return std::get<BernoulliModel>(parsed.model).induce(opt.max_gamma);
  return induced_of(parsed);
}

BernoulliModel as_bernoulli(const ParsedModel& parsed, const Options& opt) {
  if (std::holds_alternative<BernoulliModel>(parsed.model))
    return std::get<BernoulliModel>(parsed.model);
  if (std::holds_alternative<MgdModel>(parsed.model))
    return to_bernoulli(std::get<MgdModel>(parsed.model));
  if (std::holds_alternative<UniformNoiseModel>(parsed.model))
    return to_bernoulli(std::get<UniformNoiseModel>(parsed.model));
  if (std::holds_alternative<PtModel>(parsed.model))
    return to_bernoulli(std::get<PtModel>(parsed.model));
  if (std::holds_alternative<RmcModel>(parsed.model))
    return to_bernoulli(std::get<RmcModel>(parsed.model), opt.max_gamma);
  if (std::holds_alternative<TabularSequentialModel>(parsed.model))
    return bernoulli_transform(std::get<TabularSequentialModel>(parsed.model), opt.max_gamma);
  throw ValidationError("model kind '" + parsed.kind + "' has no Bernoulli form");
}

std::vector<std::string> car_witness_lines(const StateSpace& space,
                                           const std::map<uint64_t, Rat, SubsetOrder>& witness) {
  std::vector<std::string> lines;
  for (const auto& [mask, nu] : witness)
    lines.push_back("nu(" + subset_label(space, mask) + ") = " + rat_to_string(nu));
  return lines;
}

int cmd_check(const std::string& property, const std::string& path, const Options& opt,
              std::ostream& out) {
  ParsedModel parsed = parse_model_file(path);
  Report report;
  report.command = "check " + property;
  report.file = path;

  if (property == "gcar" || property == "gccar" || property == "mar" || property == "mcar") {
    if (!std::holds_alternative<CoarseningVariable>(parsed.model))
      throw ValidationError("check " + property + " needs a coarsening_variable model");
    const auto& v = std::get<CoarseningVariable>(parsed.model);
    if (property == "gcar" || property == "mar") {
      GcarVerdict verdict = property == "gcar" ? check_gcar(v) : check_mar(v);
      report.verdict = verdict.holds ? "holds" : "fails";
      report.details["holds"] = verdict.holds;
      if (verdict.holds) {
        std::vector<std::string> lines;
        json w = json::array();
        for (const auto& [key, p] : verdict.witness) {
          lines.push_back("P(G=" + v.gamma()[key.second] + " | X in " +
                          subset_label(v.space(), key.first) + ") = " + rat_to_string(p));
          w.push_back({{"observation", subset_label(v.space(), key.first)},
                       {"g", v.gamma()[key.second]},
                       {"p", rat_json(p)}});
        }
        report.section("witness", lines);
        report.details["witness"] = w;
      } else {
        const auto& viol = *verdict.violation;
        report.section("violation",
                       {"observation " + subset_label(v.space(), viol.observation) + ", g=" +
                        v.gamma()[viol.g] + ": P(G|X=" + state_name(v.space(), viol.x1) + ") = " +
                        rat_to_string(viol.p1) + " but P(G|X=" + state_name(v.space(), viol.x2) +
                        ") = " + rat_to_string(viol.p2)});
        report.details["violation"] = {{"observation", subset_label(v.space(), viol.observation)},
                                       {"g", v.gamma()[viol.g]},
                                       {"x1", state_name(v.space(), viol.x1)},
                                       {"x2", state_name(v.space(), viol.x2)},
                                       {"p1", rat_json(viol.p1)},
                                       {"p2", rat_json(viol.p2)}};
      }
      report.print(out, opt.format);
      return verdict.holds ? kExitHolds : kExitFails;
    }
    GccarVerdict verdict = property == "gccar" ? check_gccar(v) : check_mcar(v);
    report.verdict = verdict.holds ? "holds" : "fails";
    report.details["holds"] = verdict.holds;
    if (verdict.holds) {
      std::vector<std::string> lines;
      for (const auto& [g, p] : verdict.witness)
        lines.push_back("P(G=" + v.gamma()[g] + ") = " + rat_to_string(p));
      report.section("witness", lines);
    } else {
      const auto& viol = *verdict.violation;
      report.section("violation",
                     {"g=" + v.gamma()[viol.g] + ": P(G|X=" + state_name(v.space(), viol.x1) +
                      ") = " + rat_to_string(viol.p1) + " but P(G|X=" +
                      state_name(v.space(), viol.x2) + ") = " + rat_to_string(viol.p2)});
      report.details["violation"] = {{"g", v.gamma()[viol.g]},
                                     {"x1", state_name(v.space(), viol.x1)},
                                     {"x2", state_name(v.space(), viol.x2)},
                                     {"p1", rat_json(viol.p1)},
                                     {"p2", rat_json(viol.p2)}};
    }
    report.print(out, opt.format);
    return verdict.holds ? kExitHolds : kExitFails;
  }

  CoarseDistribution p = induced_for_check(parsed, opt);
  if (property == "car") {
    CarVerdict verdict = check_dcar(p);
    report.verdict = verdict.holds ? "holds" : "fails";
    report.details["holds"] = verdict.holds;
    if (verdict.holds) {
      report.section("witness", car_witness_lines(p.space(), verdict.witness));
      json w = json::object();
      for (const auto& [mask, nu] : verdict.witness) w[subset_label(p.space(), mask)] = rat_json(nu);
      report.details["witness"] = w;
    } else {
      std::vector<std::string> lines;
      json viols = json::array();
      for (const auto& viol : verdict.violations) {
        lines.push_back("observation " + subset_label(p.space(), viol.observation) + ": P(Y|X=" +
                        state_name(p.space(), viol.x1) + ") = " + rat_to_string(viol.p1) +
                        " but P(Y|X=" + state_name(p.space(), viol.x2) + ") = " +
                        rat_to_string(viol.p2));
        viols.push_back({{"observation", subset_label(p.space(), viol.observation)},
                         {"x1", state_name(p.space(), viol.x1)},
                         {"x2", state_name(p.space(), viol.x2)},
                         {"p1", rat_json(viol.p1)},
                         {"p2", rat_json(viol.p2)}});
      }
      report.section("violations", lines);
      report.details["violations"] = viols;
    }
    report.print(out, opt.format);
    return verdict.holds ? kExitHolds : kExitFails;
  }
  if (property == "ccar") {
    require_states_within(p.space(), opt);
    CcarVerdict verdict = check_dccar(p, {opt.max_covers});
    if (verdict.status == CcarVerdict::Status::Undecided) {
      report.verdict = "undecided";
      report.section("reason", {"exact-cover enumeration exceeded --max-covers (" +
                                std::to_string(opt.max_covers) + ")"});
      report.details["reason"] = "cover cap exceeded";
      report.print(out, opt.format);
      return kExitUndecided;
    }
    report.verdict = verdict.holds() ? "holds" : "fails";
    report.details["holds"] = verdict.holds();
    if (verdict.holds()) {
      std::vector<std::string> lines;
      json w = json::array();
      for (const auto& part : verdict.witness) {
        std::string blocks;
        json jblocks = json::array();
        for (uint64_t b : part.blocks) {
          blocks += subset_label(p.space(), b);
          jblocks.push_back(subset_label(p.space(), b));
        }
        lines.push_back("lambda = " + rat_to_string(part.weight) + " partition " + blocks);
        w.push_back({{"lambda", rat_json(part.weight)}, {"blocks", jblocks}});
      }
      report.section("witness", lines);
      report.details["witness"] = w;
    } else if (verdict.fail_reason == CcarVerdict::FailReason::NotCar) {
      const auto& viol = *verdict.car_violation;
      report.section("reason", {"not d-car: observation " +
                                subset_label(p.space(), viol.observation) + " has P(Y|X=" +
                                state_name(p.space(), viol.x1) + ") = " + rat_to_string(viol.p1) +
                                " but P(Y|X=" + state_name(p.space(), viol.x2) + ") = " +
                                rat_to_string(viol.p2)});
      report.details["reason"] = "not d-car";
    } else {
      std::vector<std::string> lines{"no partition mixture; exact covers of the support: " +
                                     std::to_string(verdict.cover_count)};
      json cert = json::array();
      std::string zline = "certificate z = (";
      for (size_t i = 0; i < verdict.certificate.size(); ++i) {
        if (i) zline += ",";
        zline += int_to_string(verdict.certificate[i]);
        cert.push_back(int_to_string(verdict.certificate[i]));
      }
      zline += ")";
      lines.push_back(zline);
      report.section("reason", lines);
      report.details["reason"] = "no partition mixture";
      report.details["cover_count"] = verdict.cover_count;
      report.details["certificate"] = cert;
    }
    report.print(out, opt.format);
    return verdict.holds() ? kExitHolds : kExitFails;
  }
  throw ValidationError("unknown property '" + property + "'");
}

SupportHypergraph hypergraph_of(const ParsedModel& parsed) {
  if (std::holds_alternative<SupportHypergraph>(parsed.model))
    return std::get<SupportHypergraph>(parsed.model);
  if (std::holds_alternative<CoarseDistribution>(parsed.model))
    return SupportHypergraph::from_distribution(std::get<CoarseDistribution>(parsed.model));
  throw ValidationError("hypergraph commands need a hypergraph or distribution model");
}

int cmd_hypergraph_check(const std::string& path, const Options& opt, std::ostream& out) {
  SupportHypergraph h = hypergraph_of(parse_model_file(path));
  CompatibilityVerdict verdict = check_car_compatible(h);
  Report report;
  report.command = "hypergraph check";
  report.file = path;
  report.verdict = verdict.compatible ? "compatible" : "incompatible";
  report.details["compatible"] = verdict.compatible;
  if (verdict.compatible) {
    std::vector<std::string> lines;
    json w = json::object();
    for (size_t j = 0; j < verdict.nu.size(); ++j) {
      lines.push_back("nu(" + h.nodes()[j].label + ") = " + rat_to_string(verdict.nu[j]));
      w[h.nodes()[j].label] = rat_json(verdict.nu[j]);
    }
    report.section("witness", lines);
    report.details["witness"] = w;
  } else {
    std::vector<std::string> lines;
    std::string zline = "z = (";
    json cert = json::array();
    for (size_t i = 0; i < verdict.certificate.size(); ++i) {
      if (i) zline += ",";
      zline += int_to_string(verdict.certificate[i]);
      cert.push_back(int_to_string(verdict.certificate[i]));
    }
    zline += ")";
    lines.push_back(zline);
    auto seq_line = [&](const char* name, const std::vector<size_t>& seq) {
      std::string s = std::string(name) + " = (";
      json jseq = json::array();
      for (size_t i = 0; i < seq.size(); ++i) {
        if (i) s += ",";
        s += h.edge_space().label(seq[i]);
        jseq.push_back(h.edge_space().label(seq[i]));
      }
      s += ")";
      lines.push_back(s);
      return jseq;
    };
    json pos = seq_line("sequence_x", verdict.sequence_pos);
    json neg = seq_line("sequence_x'", verdict.sequence_neg);
    lines.push_back("lengths " + std::to_string(verdict.sequence_pos.size()) + " vs " +
                    std::to_string(verdict.sequence_neg.size()));
    report.section("certificate", lines);
    report.details["certificate"] = cert;
    report.details["sequence_x"] = pos;
    report.details["sequence_x_prime"] = neg;
  }
  report.print(out, opt.format);
  return verdict.compatible ? kExitHolds : kExitFails;
}

int cmd_hypergraph_screen(const std::string& path, const Options& opt, std::ostream& out) {
  SupportHypergraph h = hypergraph_of(parse_model_file(path));
  auto nested = nested_edges_screen(h);
  Report report;
  report.command = "hypergraph screen";
  report.file = path;
  if (nested) {
    report.verdict = "incompatible";
    report.section("nested edges",
                   {"edge " + h.edge_space().label(nested->first) + " nested inside edge " +
                    h.edge_space().label(nested->second)});
    report.details["nested"] = {{"inner", h.edge_space().label(nested->first)},
                                {"outer", h.edge_space().label(nested->second)}};
  } else {
    report.verdict = "no nested edges";
    report.details["nested"] = nullptr;
  }
  report.print(out, opt.format);
  return nested ? kExitFails : kExitHolds;
}

int cmd_hypergraph_realize(const std::string& path, const Options& opt, std::ostream& out) {
  SupportHypergraph h = hypergraph_of(parse_model_file(path));
  CoarseDistribution p = h.realize();
  if (opt.format == "json") {
    out << distribution_to_json(p) << "\n";
  } else {
    Report report;
    report.command = "hypergraph realize";
    report.file = path;
    report.verdict = "ok";
    std::vector<std::string> lines;
    for (size_t x = 0; x < p.space().size(); ++x) {
      lines.push_back("P(X=" + p.space().label(x) + ") = " + rat_to_string(p.px(x)));
      for (const auto& [mask, prob] : p.cond_row(x))
        lines.push_back("  P(Y=" + subset_label(p.space(), mask) + "|X=" + p.space().label(x) +
                        ") = " + rat_to_string(prob));
    }
    report.section("distribution", lines);
    report.print(out, opt.format);
  }
  return kExitHolds;
}

int cmd_hypergraph_enumerate(size_t max_nodes, size_t max_edges, bool compatible_only,
                             const Options& opt, std::ostream& out) {
  std::vector<SupportHypergraph> all = enumerate_hypergraphs(max_nodes, max_edges);
  Report report;
  report.command = "hypergraph enumerate";
  report.verdict = "ok";
  std::vector<std::string> lines;
  json items = json::array();
  size_t compatible_count = 0;
  for (const auto& h : all) {
    CompatibilityVerdict verdict = check_car_compatible(h);
    if (compatible_only && !verdict.compatible) continue;
    if (verdict.compatible) ++compatible_count;
    std::string desc = std::to_string(h.nodes().size()) + " nodes, edges:";
    json jtypes = json::array();
    for (size_t e = 0; e < h.edge_count(); ++e) {
      std::string type = "{";
      bool first = true;
      for (size_t j = 0; j < h.nodes().size(); ++j) {
        if ((h.nodes()[j].extent >> e) & 1) {
          if (!first) type += ",";
          type += h.nodes()[j].label;
          first = false;
        }
      }
      type += "}";
      desc += " " + type;
      jtypes.push_back(type);
    }
    desc += verdict.compatible ? " -> compatible" : " -> incompatible";
    lines.push_back(desc);
    items.push_back({{"nodes", h.nodes().size()},
                     {"edges", jtypes},
                     {"compatible", verdict.compatible}});
  }
  lines.push_back("total listed: " + std::to_string(items.size()) +
                  ", compatible: " + std::to_string(compatible_count));
  report.section("hypergraphs", lines);
  report.details["hypergraphs"] = items;
  report.details["compatible_count"] = compatible_count;
  report.print(out, opt.format);
  return kExitHolds;
}

int cmd_induce(const std::string& path, const Options& opt, std::ostream& out) {
  ParsedModel parsed = parse_model_file(path);
  CoarseDistribution p = induced_for_check(parsed, opt);
  if (opt.format == "json") {
    out << distribution_to_json(p) << "\n";
    return kExitHolds;
  }
  Report report;
  report.command = "induce";
  report.file = path;
  report.verdict = "ok";
  std::vector<std::string> lines;
  for (size_t x = 0; x < p.space().size(); ++x) {
    lines.push_back("P(X=" + p.space().label(x) + ") = " + rat_to_string(p.px(x)));
    if (p.px(x) == 0) continue;
    for (const auto& [mask, prob] : p.cond_row(x))
      lines.push_back("  P(Y=" + subset_label(p.space(), mask) + "|X=" + p.space().label(x) +
                      ") = " + rat_to_string(prob));
  }
  report.section("distribution", lines);
  report.print(out, opt.format);
  return kExitHolds;
}

int cmd_simulate(const std::string& path, uint64_t n, uint64_t seed, std::optional<double> tolerance,
                 const Options& opt, std::ostream& out) {
  ParsedModel parsed = parse_model_file(path);
  SimulationTable table = std::visit(
      [&](const auto& model) -> SimulationTable {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, MgdModel> || std::is_same_v<T, RmcModel> ||
                      std::is_same_v<T, UniformNoiseModel> || std::is_same_v<T, PtModel> ||
                      std::is_same_v<T, TabularSequentialModel>) {
          return simulate(model, n, seed);
        } else {
          throw ValidationError("simulate needs a procedural model (mgd, rmc, noise, pt, tabular)");
        }
      },
      parsed.model);
  CoarseDistribution exact = induced_for_check(parsed, opt);
  EmpiricalReport cmp = compare_empirical(exact, table, tolerance.value_or(0.01));

  Report report;
  report.command = "simulate";
  report.file = path;
  report.seed = seed;
  report.verdict = tolerance ? (cmp.pass ? "pass" : "fail") : "ok";
  std::vector<std::string> lines;
  json counts = json::array();
  for (const auto& [key, c] : table.counts) {
    lines.push_back("count(" + exact.space().label(key.first) + ", " +
                    subset_label(exact.space(), key.second) + ") = " + std::to_string(c));
    counts.push_back({{"x", exact.space().label(key.first)},
                      {"set", subset_label(exact.space(), key.second)},
                      {"n", c}});
  }
  report.section("counts", lines);
  std::ostringstream gap;
  gap.precision(6);
  gap << cmp.max_gap;
  report.section("comparison",
                 {"samples = " + std::to_string(n), "max gap = " + gap.str(),
                  "at (" + exact.space().label(cmp.argmax_state) + ", " +
                      subset_label(exact.space(), cmp.argmax_observation) + ")"});
  report.details["counts"] = counts;
  report.details["max_gap"] = cmp.max_gap;
  report.details["samples"] = n;
  report.print(out, opt.format);
  return (!tolerance || cmp.pass) ? kExitHolds : kExitFails;
}

int cmd_transform(const std::string& path, const std::string& out_path, const Options& opt,
                  std::ostream& out) {
  ParsedModel parsed = parse_model_file(path);
  BernoulliModel b = as_bernoulli(parsed, opt);
  std::string text = bernoulli_to_json(b);
  if (!out_path.empty()) {
    std::ofstream file(out_path);
    if (!file) throw Error("cannot write '" + out_path + "'");
    file << text << "\n";
    out << "wrote " << out_path << "\n";
  } else {
    out << text << "\n";
  }
  return kExitHolds;
}

int cmd_honesty(const std::string& path, const Options& opt, std::ostream& out) {
  ParsedModel parsed = parse_model_file(path);
  BernoulliModel b = as_bernoulli(parsed, opt);
  HonestyVerdict verdict = check_honest(b, opt.max_gamma);
  Report report;
  report.command = "honesty";
  report.file = path;
  report.verdict = verdict.honest ? "honest" : "dishonest";
  report.details["honest"] = verdict.honest;
  if (!verdict.honest) {
    const auto& viol = *verdict.violation;
    std::string gline = "g = (";
    json jg = json::array();
    for (size_t i = 0; i < viol.assignment.size(); ++i) {
      if (i) gline += ",";
      const auto& var = b.vars()[i];
      gline += var.values[viol.assignment[i]];
      jg.push_back(var.values[viol.assignment[i]]);
    }
    gline += ")";
    report.section("violation",
                   {"f(" + b.space().label(viol.x1) + ", g) = " +
                        subset_label(b.space(), viol.observation) + " contains " +
                        b.space().label(viol.x2) + " but f(" + b.space().label(viol.x2) +
                        ", g) = " + subset_label(b.space(), viol.other),
                    gline, "probability = " + rat_to_string(viol.probability)});
    report.details["violation"] = {{"x1", b.space().label(viol.x1)},
                                   {"x2", b.space().label(viol.x2)},
                                   {"observation", subset_label(b.space(), viol.observation)},
                                   {"other", subset_label(b.space(), viol.other)},
                                   {"g", jg},
                                   {"probability", rat_json(viol.probability)}};
  }
  report.print(out, opt.format);
  return verdict.honest ? kExitHolds : kExitFails;
}

int cmd_probe(const std::string& path, const std::string& mode, size_t trials, uint64_t seed,
              const Options& opt, std::ostream& out) {
  ParsedModel parsed = parse_model_file(path);
  BernoulliModel b = as_bernoulli(parsed, opt);
  ProbeMode probe_mode;
  if (mode == "car") {
    probe_mode = ProbeMode::Car;
  } else if (mode == "ccar") {
    probe_mode = ProbeMode::Ccar;
  } else {
    throw ValidationError("--mode must be car or ccar");
  }
  ProbeResult result = robustness_probe(b, probe_mode, trials, seed, opt.max_gamma);
  Report report;
  report.command = "probe --mode " + mode;
  report.file = path;
  report.seed = seed;
  report.verdict = result.robust_so_far ? "robust-so-far" : "broken";
  report.details["robust_so_far"] = result.robust_so_far;
  if (result.broken) {
    report.section("perturbation", {"component: " + result.broken->component,
                                    result.broken->description,
                                    result.broken->trial == 0
                                        ? "found by the deterministic sweep"
                                        : "found at trial " + std::to_string(result.broken->trial)});
    report.details["broken"] = {{"component", result.broken->component},
                                {"description", result.broken->description},
                                {"trial", result.broken->trial}};
  } else {
    report.section("result", {"survived the deterministic sweep and " + std::to_string(trials) +
                              " random reweightings"});
  }
  report.print(out, opt.format);
  return result.robust_so_far ? kExitHolds : kExitFails;
}

int cmd_update(const std::string& path, const std::string& observe, const Options& opt,
               std::ostream& out) {
  ParsedModel parsed = parse_model_file(path);
  CoarseDistribution p = induced_for_check(parsed, opt);
  std::vector<std::string> labels;
  std::string current;
  for (char c : observe) {
    if (c == ',') {
      if (!current.empty()) labels.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) labels.push_back(current);
  StateSubset u = StateSubset::from_labels(p.space(), labels);

  auto posterior = update_posterior(p, u);
  auto naive = naive_condition(p, u);
  bool agree = true;
  for (size_t x : u.members()) agree = agree && posterior.at(x) == naive.at(x);

  Report report;
  report.command = "update --observe " + observe;
  report.file = path;
  report.verdict = agree ? "conditioning valid" : "conditioning invalid";
  std::vector<std::string> post_lines, naive_lines;
  for (size_t x : u.members()) {
    post_lines.push_back("P(X=" + p.space().label(x) + " | Y=" + u.label() + ") = " +
                         rat_to_string(posterior.at(x)));
    naive_lines.push_back("P(X=" + p.space().label(x) + " | X in " + u.label() + ") = " +
                          rat_to_string(naive.at(x)));
  }
  report.section("posterior", post_lines);
  report.section("naive conditioning", naive_lines);
  report.details["posterior"] = posterior_json(p.space(), posterior);
  report.details["naive"] = posterior_json(p.space(), naive);
  report.details["agree"] = agree;
  report.print(out, opt.format);
  return agree ? kExitHolds : kExitFails;
}

TabularSequentialModel monty_model(bool host_knows_choice) {
  StateSpace doors({"A", "B", "C"});
  std::vector<Rat> px(3, Rat(1, 3));
  TabularSequentialModel m(doors, px, {{"h", "t"}});
  for (size_t x = 0; x < 3; ++x) m.set_kernel_row(0, x, {Rat(1, 2), Rat(1, 2)});
  auto set = [&](const char* x, size_t g, const char* a, const char* b) {
    uint64_t mask = (1ull << doors.require_index(a)) | (1ull << doors.require_index(b));
    m.set_map(doors.require_index(x), g, mask);
  };
  if (host_knows_choice) {
    // The host avoids the prize door and the contestant's door A; heads picks
    // the alphabetically first permitted door.
    set("A", 0, "A", "C");
    set("A", 1, "A", "B");
    set("B", 0, "A", "B");
    set("B", 1, "A", "B");
    set("C", 0, "A", "C");
    set("C", 1, "A", "C");
  } else {
    // The contestant has not spoken; the host only avoids the prize door.
    set("A", 0, "A", "C");
    set("A", 1, "A", "B");
    set("B", 0, "B", "C");
    set("B", 1, "A", "B");
    set("C", 0, "B", "C");
    set("C", 1, "A", "C");
  }
  return m;
}

int cmd_demo(const std::string& which, const Options& opt, std::ostream& out) {
  Report report;
  report.command = "demo " + which;

  if (which == "monty") {
    CoarseDistribution informed = induce_tabular(monty_model(true));
    CoarseDistribution blind = induce_tabular(monty_model(false));
    StateSubset u = StateSubset::from_labels(informed.space(), std::vector<std::string>{"A", "C"});

    auto lines_for = [&](const CoarseDistribution& p, const char* name) {
      auto posterior = update_posterior(p, u);
      auto naive = naive_condition(p, u);
      bool agree = true;
      std::vector<std::string> lines;
      for (size_t x : u.members()) {
        lines.push_back(std::string(name) + ": P(X=" + p.space().label(x) + " | Y={A,C}) = " +
                        rat_to_string(posterior.at(x)) + ", naive = " + rat_to_string(naive.at(x)));
        agree = agree && posterior.at(x) == naive.at(x);
      }
      lines.push_back(std::string(name) + ": conditioning " + (agree ? "valid" : "invalid"));
      return lines;
    };

    std::vector<std::string> lines = lines_for(informed, "host-knows");
    std::vector<std::string> blind_lines = lines_for(blind, "host-blind");
    lines.insert(lines.end(), blind_lines.begin(), blind_lines.end());
    report.verdict = "ok";
    report.section("monty hall", lines);
    report.details["host_knows_car"] = check_dcar(informed).holds;
    report.details["host_blind_car"] = check_dcar(blind).holds;
    report.print(out, opt.format);
    return kExitHolds;
  }

  if (which == "tests") {
    // Two medical tests; the second runs only after a positive first test.
    ProductShape shape({{"p", "n"}, {"p", "n"}});
    CoarseningVariable m = missingness_coarsening_variable(shape);
    const StateSpace& space = shape.tuple_space();
    auto mask_index = [&](const char* bits) -> size_t {
      for (size_t g = 0; g < m.gamma_size(); ++g) {
        if (m.gamma()[g] == bits) return g;
      }
      throw Error("missing mask");
    };
    for (size_t x = 0; x < space.size(); ++x) {
      bool first_negative = space.label(x)[1] == 'n';
      size_t g = mask_index(first_negative ? "01" : "00");
      m.set_joint(x, g, Rat(1, 4));
    }
    GcarVerdict mar = check_mar(m);
    GccarVerdict mcar = check_mcar(m);
    CoarseDistribution p = m.induced_distribution();
    CcarVerdict ccar = check_dccar(p);

    std::vector<std::string> lines;
    MissingnessRecord rec = MissingnessRecord::from_labels(shape, {std::optional<std::string>("n"),
                                                                   std::nullopt});
    lines.push_back("U((n,*)) = " + observation_set(shape, rec).label());
    lines.push_back(std::string("m-mar: ") + (mar.holds ? "holds" : "fails"));
    lines.push_back(std::string("m-mcar: ") + (mcar.holds ? "holds" : "fails"));
    lines.push_back(std::string("d-ccar: ") + (ccar.holds() ? "holds" : "fails"));
    for (const auto& part : ccar.witness) {
      std::string blocks;
      for (uint64_t b : part.blocks) blocks += subset_label(space, b);
      lines.push_back("  lambda = " + rat_to_string(part.weight) + " partition " + blocks);
    }
    report.verdict = "ok";
    report.section("sequential tests", lines);
    report.details["mar"] = mar.holds;
    report.details["mcar"] = mcar.holds;
    report.details["ccar"] = ccar.holds();
    report.print(out, opt.format);
    return kExitHolds;
  }

  if (which == "figure3") {
    StateSpace edges({"x1", "x2", "x3", "x4", "x5"});
    std::vector<SupportHypergraph::Node> nodes;
    auto node = [&](const char* name, std::vector<std::string> members) {
      nodes.push_back({name, StateSubset::from_labels(edges, members).mask()});
    };
    node("U1", {"x1", "x3"});
    node("U2", {"x1", "x4"});
    node("U3", {"x1", "x5"});
    node("U4", {"x2", "x3"});
    node("U5", {"x2", "x4"});
    node("U6", {"x2", "x5"});
    SupportHypergraph h(edges, nodes);
    auto nested = nested_edges_screen(h);
    CompatibilityVerdict verdict = check_car_compatible(h);
    std::vector<std::string> lines;
    lines.push_back(std::string("nested edges: ") + (nested ? "present" : "none"));
    lines.push_back(std::string("compatible: ") + (verdict.compatible ? "yes" : "no"));
    std::string zline = "z = (";
    for (size_t i = 0; i < verdict.certificate.size(); ++i) {
      if (i) zline += ",";
      zline += int_to_string(verdict.certificate[i]);
    }
    zline += ")";
    lines.push_back(zline);
    auto seq = [&](const char* name, const std::vector<size_t>& s) {
      std::string line = std::string(name) + " = (";
      for (size_t i = 0; i < s.size(); ++i) {
        if (i) line += ",";
        line += edges.label(s[i]);
      }
      line += ")";
      return line;
    };
    lines.push_back(seq("sequence_x", verdict.sequence_pos));
    lines.push_back(seq("sequence_x'", verdict.sequence_neg));
    report.verdict = verdict.compatible ? "compatible" : "incompatible";
    report.section("pentagon-free incompatible support", lines);
    report.details["compatible"] = verdict.compatible;
    report.print(out, opt.format);
    return verdict.compatible ? kExitHolds : kExitFails;
  }

  if (which == "figure4") {
    std::vector<SupportHypergraph> all = enumerate_hypergraphs(3, 6);
    std::vector<std::string> lines;
    size_t compatible = 0;
    for (const auto& h : all) {
      if (h.nodes().size() != 3) continue;
      CompatibilityVerdict verdict = check_car_compatible(h);
      if (!verdict.compatible) continue;
      ++compatible;
      std::string desc = "edges:";
      for (size_t e = 0; e < h.edge_count(); ++e) {
        std::string type = "{";
        bool first = true;
        for (size_t j = 0; j < h.nodes().size(); ++j) {
          if ((h.nodes()[j].extent >> e) & 1) {
            if (!first) type += ",";
            type += h.nodes()[j].label;
            first = false;
          }
        }
        type += "}";
        desc += " " + type;
      }
      lines.push_back(desc);
    }
    lines.push_back("compatible 3-node hypergraphs: " + std::to_string(compatible));
    report.verdict = "ok";
    report.section("catalogue", lines);
    report.details["compatible_count"] = compatible;
    report.print(out, opt.format);
    return kExitHolds;
  }

  throw ValidationError("unknown demo '" + which + "' (monty, tests, figure3, figure4)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact analysis of coarse data: car/ccar checks, support hypergraphs, "
               "and procedural coarsening models"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--format", opt.format, "report format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--max-covers", opt.max_covers, "cap on exact-cover enumeration");
  app.add_option("--max-gamma", opt.max_gamma, "cap on G assignment enumeration");
  app.add_option("--max-states", opt.max_states, "cap on state count for exhaustive searches");

  std::string property, file, mode = "car", observe, out_path, demo_name, sub_name;
  uint64_t n = 100000, seed = 0;
  size_t trials = 100, max_nodes = 3, max_edges = 6;
  bool compatible_only = false;
  std::optional<double> tolerance;
  double tolerance_value = 0.01;

  auto* check = app.add_subcommand("check", "decide car/ccar/gcar/gccar/mar/mcar for a model file");
  check->add_option("property", property, "one of car, ccar, gcar, gccar, mar, mcar")->required();
  check->add_option("file", file, "model file")->required();

  auto* hyper = app.add_subcommand("hypergraph", "support hypergraph commands");
  hyper->add_option("action", sub_name, "check, realize, screen, or enumerate")->required();
  hyper->add_option("file", file, "hypergraph or distribution file");
  hyper->add_option("--max-nodes", max_nodes, "enumeration: node cap (<= 4)");
  hyper->add_option("--max-edges", max_edges, "enumeration: distinct edge cap (<= 6)");
  hyper->add_flag("--compatible-only", compatible_only, "list only car-compatible hypergraphs");

  auto* induce = app.add_subcommand("induce", "exact induced distribution of a procedural model");
  induce->add_option("file", file, "model file")->required();

  auto* sim = app.add_subcommand("simulate", "seeded forward simulation with exact comparison");
  sim->add_option("file", file, "model file")->required();
  sim->add_option("--n", n, "sample count");
  sim->add_option("--seed", seed, "rng seed");
  auto* tol_opt = sim->add_option("--tolerance", tolerance_value, "fail if the gap exceeds this");

  auto* transform = app.add_subcommand("transform", "rebuild a model over independent randomizers");
  transform->add_option("target", sub_name, "only 'bernoulli'")->required();
  transform->add_option("file", file, "model file")->required();
  transform->add_option("-o,--output", out_path, "write the model here instead of stdout");

  auto* honesty = app.add_subcommand("honesty", "decide honesty of a Bernoulli model");
  honesty->add_option("file", file, "model file")->required();

  auto* probe = app.add_subcommand("probe", "robustness probe under support-preserving perturbations");
  probe->add_option("file", file, "model file")->required();
  probe->add_option("--mode", mode, "car or ccar");
  probe->add_option("--trials", trials, "random trials after the deterministic sweep");
  probe->add_option("--seed", seed, "rng seed");

  auto* update = app.add_subcommand("update", "posterior vs naive conditioning at an observation");
  update->add_option("file", file, "distribution or model file")->required();
  update->add_option("--observe", observe, "comma-separated state labels")->required();

  auto* demo = app.add_subcommand("demo", "built-in demonstrations");
  demo->add_option("name", demo_name, "monty, tests, figure3, or figure4")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      out << app.help();
      return kExitHolds;
    }
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (check->parsed()) return cmd_check(property, file, opt, out);
    if (hyper->parsed()) {
      if (sub_name == "check") return cmd_hypergraph_check(file, opt, out);
      if (sub_name == "screen") return cmd_hypergraph_screen(file, opt, out);
      if (sub_name == "realize") return cmd_hypergraph_realize(file, opt, out);
      if (sub_name == "enumerate")
        return cmd_hypergraph_enumerate(max_nodes, max_edges, compatible_only, opt, out);
      throw ValidationError("unknown hypergraph action '" + sub_name + "'");
    }
    if (induce->parsed()) return cmd_induce(file, opt, out);
    if (sim->parsed()) {
      if (tol_opt->count() > 0) tolerance = tolerance_value;
      return cmd_simulate(file, n, seed, tolerance, opt, out);
    }
    if (transform->parsed()) {
      if (sub_name != "bernoulli") throw ValidationError("transform target must be 'bernoulli'");
      return cmd_transform(file, out_path, opt, out);
    }
    if (honesty->parsed()) return cmd_honesty(file, opt, out);
    if (probe->parsed()) return cmd_probe(file, mode, trials, seed, opt, out);
    if (update->parsed()) return cmd_update(file, observe, opt, out);
    if (demo->parsed()) return cmd_demo(demo_name, opt, out);
    err << "error: no command\n";
    return kExitInputError;
  } catch (const CapExceeded& e) {
    err << "undecided: " << e.what() << "\n";
    return kExitUndecided;
  } catch (const InternalInconsistency& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace coarse::cli
