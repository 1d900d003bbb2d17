// pmap: command-line front end over the pmap library.
//
// Exit status: 0 success, 1 malformed input, 2 input outside the supported
// graphs or elements (a JSON reason is printed on stdout).

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmap/blueprint.hpp"
#include "pmap/cbwitness.hpp"
#include "pmap/classify.hpp"
#include "pmap/fluxdim.hpp"
#include "pmap/lengthtree.hpp"
#include "pmap/mcg.hpp"

using namespace pmap;
using nlohmann::json;

namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_source(const std::string& arg) {
  if (arg == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(arg);
  if (!in) throw Usage("cannot open '" + arg + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool is_file(const std::string& arg) { return arg == "-" || std::ifstream(arg).good(); }

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bad JSON: ") + e.what());
  }
}

// Blueprint from a file path or inline JSON.
BlueprintPtr load_blueprint(const std::string& arg) {
  json j = parse_json(is_file(arg) ? read_source(arg) : arg);
  if (j.contains("blueprint")) j = j.at("blueprint");
  return Blueprint::from_json(j);
}

// Pick the registered family an expression can live on when --graph is absent.
GraphSpec infer_graph(const std::string& text) {
  Expr e = parse_expr(text);
  int max_ray = 0, max_leg = -1;
  bool tooth = false, ladder = false;
  for (const auto& f : e) {
    const Generator& g = f.gen;
    if (g.kind == Generator::WordMap && g.slot == 'R') max_ray = std::max(max_ray, g.slot_index);
    if (g.kind == Generator::WordMap && g.slot == 'T') tooth = true;
    if (g.kind == Generator::Shift) {
      if (g.leg >= 0) max_leg = std::max(max_leg, g.leg);
      else ladder = true;
    }
    for (int i : g.word.support())
      if (i <= 0) ladder = true;
    if (g.kind == Generator::WordMap && g.slot == 'J' && g.slot_index <= 0) ladder = true;
    if (g.kind == Generator::LoopSwap && g.m1 <= 0) ladder = true;
  }
  if (tooth) return {GraphSpec::Comb, 0};
  if (max_leg >= 0) return {GraphSpec::Star, std::max(3, max_leg + 1)};
  if (ladder) return {GraphSpec::Ladder, 0};
  if (max_ray > 0) return {GraphSpec::Hungry, max_ray};
  return {GraphSpec::LochNess, 0};
}

// Element from inline expression text, an element JSON, or a file holding either.
MappingClass load_element(const std::string& arg, const std::string& graph) {
  std::string text = is_file(arg) ? read_source(arg) : arg;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j = parse_json(text);
    if (j.contains("element")) j = j.at("element");
    return MappingClass::from_json(j);
  }
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  GraphSpec g = graph.empty() ? infer_graph(text) : GraphSpec::parse(graph);
  return MappingClass::parse(g, text);
}

std::vector<MappingClass> load_elements(const std::vector<std::string>& args, const std::string& graph) {
  std::vector<MappingClass> out;
  for (const auto& a : args) {
    if (is_file(a) && a != "-") {
      std::istringstream in(read_source(a));
      std::string line;
      while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos && line[line.find_first_not_of(" \t")] != '#')
          out.push_back(load_element(line, graph));
    } else {
      out.push_back(load_element(a, graph));
    }
  }
  return out;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

json element_report(const MappingClass& g) {
  json out = {{"schema", 1}, {"element", g.to_json()}};
  std::set<int> s = g.support_letters();
  out["supportLetters"] = std::vector<int>(s.begin(), s.end());
  if (g.graph().family == GraphSpec::Comb) out["length"] = length(g);
  return out;
}

int fail_domain(const DomainError& e) {
  emit({{"schema", 1}, {"error", {{"kind", "domain"}, {"tag", e.tag}, {"message", e.what()}}}});
  return 2;
}

int fail_input(const std::string& what) {
  std::cerr << "error: " << what << "\n";
  emit({{"schema", 1}, {"error", {{"kind", "input"}, {"message", what}}}});
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pure mapping class groups of infinite graphs: classification, witnesses, flux, length trees"};
  app.require_subcommand(1, 1);
  std::string format = "json", graph;

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "end profile and coarse-boundedness verdicts of a blueprint");
  std::string blueprint_arg;
  int radius = 3;
  classify_cmd->add_option("blueprint", blueprint_arg, "blueprint JSON file or inline JSON")->required();
  classify_cmd->add_option("--format", format, "json, text, or dot (truncation)")->check(CLI::IsMember({"json", "text", "dot"}));
  classify_cmd->add_option("--radius", radius, "truncation radius for --format dot")->check(CLI::NonNegativeNumber);

  // element
  auto* element_cmd = app.add_subcommand("element", "normal form of an element expression");
  std::string element_arg;
  element_cmd->add_option("element", element_arg, "expression, element JSON, or file")->required();
  element_cmd->add_option("--graph", graph, "lochness, hungry:N, millipede, ladder, comb, tripod, star:k");
  element_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

  // witness
  auto* witness_cmd = app.add_subcommand("witness", "factorization witnessing coarse boundedness");
  int window = 1;
  bool check = false;
  witness_cmd->add_option("element", element_arg, "expression, element JSON, or a stored witness JSON with --check")->required();
  witness_cmd->add_option("--graph", graph);
  witness_cmd->add_option("--window", window, "window size n")->check(CLI::PositiveNumber);
  witness_cmd->add_flag("--check", check, "re-verify the certificate from its factors");

  // flux
  auto* flux_cmd = app.add_subcommand("flux", "flux across an end partition");
  std::string cut = "S0";
  flux_cmd->add_option("element", element_arg)->required();
  flux_cmd->add_option("--graph", graph);
  flux_cmd->add_option("--cut", cut, "S<c> on the ladder, L<leg>.<q> on a star");

  // displacement
  auto* disp_cmd = app.add_subcommand("displacement", "displacement of an element");
  disp_cmd->add_option("element", element_arg)->required();
  disp_cmd->add_option("--graph", graph);
  disp_cmd->add_option("--cut", cut, "basepoint partition");

  // tree
  auto* tree_cmd = app.add_subcommand("tree", "dendrogram of comb elements under the length ultrametric");
  std::vector<std::string> element_args;
  int random_count = 0;
  unsigned seed = 1;
  tree_cmd->add_option("elements", element_args, "expressions, element JSON, or files with one expression per line");
  tree_cmd->add_option("--random", random_count, "add this many random tooth word maps")->check(CLI::NonNegativeNumber);
  tree_cmd->add_option("--seed", seed, "seed for --random");
  tree_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "dot"}));

  // length
  auto* length_cmd = app.add_subcommand("length", "length of a comb element");
  length_cmd->add_option("element", element_arg)->required();

  // leveled
  auto* leveled_cmd = app.add_subcommand("leveled", "image of a leveled vertex under a comb element");
  std::string vertex_arg;
  leveled_cmd->add_option("element", element_arg)->required();
  leveled_cmd->add_option("--vertex", vertex_arg, "{\"level\": n, \"values\": {\"i\": word}} inline or file")->required();

  // hyp
  auto* hyp_cmd = app.add_subcommand("hyp", "four-point hyperbolicity of a distance table");
  std::string table_arg;
  std::string hyp_format = "text";
  hyp_cmd->add_option("table", table_arg, "whitespace distance table, '-' for stdin")->required();
  hyp_cmd->add_option("--format", hyp_format)->check(CLI::IsMember({"json", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*classify_cmd) {
      BlueprintPtr b = load_blueprint(blueprint_arg);
      EndProfile p = end_profile(b);
      ClassificationReport r = classify(p);
      if (format == "dot") {
        std::cout << truncate(b, radius).to_dot();
      } else if (format == "text") {
        std::cout << "cbVerdict: " << (r.cb == CbVerdict::CB ? "CB" : "NotCB") << " (" << r.cbReason.tag << ")\n"
                  << "locallyCbVerdict: " << (r.locallyCb == LocalVerdict::LocallyCB ? "LocallyCB" : "NotLocallyCB") << " ("
                  << r.locCbReason.tag << ")\n"
                  << "asdim: " << r.asdim << "\n"
                  << "h1LowerBound: " << r.h1LowerBound << "\n";
      } else {
        emit({{"schema", 1}, {"blueprint", b->to_json()}, {"profile", p.to_json()}, {"report", r.to_json()}});
      }
    } else if (*element_cmd) {
      MappingClass g = load_element(element_arg, graph);
      if (format == "text") {
        std::cout << "graph: " << g.graph().name() << "\n";
        for (const auto& [r, w] : g.drift()) std::cout << "drift " << r.str() << ": " << w.str() << "\n";
        for (const auto& [i, w] : g.core().table()) std::cout << "a" << i << " -> " << w.str() << "\n";
      } else {
        emit(element_report(g));
      }
    } else if (*witness_cmd) {
      std::string text = is_file(element_arg) ? read_source(element_arg) : element_arg;
      json stored;
      bool from_witness = false;
      if (auto f = text.find_first_not_of(" \t\r\n"); f != std::string::npos && text[f] == '{') {
        stored = parse_json(text);
        from_witness = stored.contains("factors");
      }
      WitnessFactorization w = from_witness ? WitnessFactorization::from_json(stored) : full_witness(load_element(element_arg, graph), window);
      json out = w.to_json();
      if (check || from_witness) {
        auto v = pmap::verify(w);
        out["check"] = {{"ok", v.ok}, {"failure", v.failure}};
        emit(out);
        if (!v.ok) return 2;
      } else {
        emit(out);
      }
    } else if (*flux_cmd) {
      MappingClass f = load_element(element_arg, graph);
      emit(flux(f, EndPartition::parse(f.graph(), cut)).to_json());
    } else if (*disp_cmd) {
      MappingClass f = load_element(element_arg, graph);
      emit(displacement(f, EndPartition::parse(f.graph(), cut)).to_json());
    } else if (*tree_cmd) {
      std::vector<MappingClass> els = load_elements(element_args, graph.empty() ? "comb" : graph);
      std::mt19937 rng(seed);
      for (int k = 0; k < random_count; ++k) {
        int tooth = 1 + static_cast<int>(rng() % 5), letter = 1 + static_cast<int>(rng() % 3);
        els.push_back(MappingClass::parse({GraphSpec::Comb, 0}, "W(a" + std::to_string(letter) + ",T" + std::to_string(tooth) + ".0)"));
      }
      if (els.empty()) throw Usage("tree needs at least one element");
      UltraTree t = ultratree(els);
      if (format == "dot") {
        std::cout << t.to_dot();
      } else {
        json out = t.to_json();
        json inputs = json::array();
        for (const auto& g : els) inputs.push_back(g.to_json());
        out["elements"] = inputs;
        out["delta"] = t.leaf_count() >= 4 ? hyperbolicity_delta(t.metric()) : 0.0;
        emit(out);
      }
    } else if (*length_cmd) {
      MappingClass g = load_element(element_arg, "comb");
      emit({{"schema", 1}, {"length", length(g)}});
    } else if (*leveled_cmd) {
      MappingClass g = load_element(element_arg, "comb");
      LeveledVertex v = LeveledVertex::from_json(parse_json(is_file(vertex_arg) ? read_source(vertex_arg) : vertex_arg));
      emit({{"schema", 1}, {"vertex", v.to_json()}, {"image", leveled_action(g, v).to_json()}});
    } else if (*hyp_cmd) {
      std::istringstream in(read_source(table_arg));
      DistanceMatrix d = parse_distance_table(in);
      double delta = hyperbolicity_delta(d);
      bool ultra = is_ultrametric(d);
      if (hyp_format == "json") {
        emit({{"schema", 1}, {"points", d.size()}, {"delta", delta}, {"ultrametric", ultra}});
      } else {
        std::cout << "delta: " << delta << "\n" << "ultrametric: " << (ultra ? "true" : "false") << "\n";
      }
    }
  } catch (const DomainError& e) {
    return fail_domain(e);
  } catch (const ParseError& e) {
    return fail_input(e.what());
  } catch (const Usage& e) {
    return fail_input(e.what());
  } catch (const json::exception& e) {
    return fail_input(e.what());
  }
  return 0;
}
