// Command-line front end: entropy evaluation, rate-region feasibility and
// search, the two worked example reports, the SRM lab toy instance, and
// the classical Monte-Carlo simulator. All reports echo their inputs and
// print floating-point values with 12 significant digits.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cqbc/example1.hpp"
#include "cqbc/mcsim.hpp"
#include "cqbc/srm.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr double kPi = 3.14159265358979323846;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
  // 12 significant digits for every float in the report
  const std::string text = j.dump(2);
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot write " + out_path);
    out << text << "\n";
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot write " + out_path);
    out << text;
  }
}

nlohmann::json spec_echo(const nlohmann::json& params) {
  return {{"tool", "cqbc"}, {"version", kToolVersion}, {"params", params}};
}

std::string fmt12(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  std::string s = os.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-region toolkit for 3-user classical-quantum broadcast channels"};
  app.require_subcommand(1);

  std::string channel_path, model_path, out_path;
  std::uint64_t seed = 1;
  int trials = 2000;
  double delta1 = 0.01, tau = 0.05, delta = 0.10;
  double phi2_deg = 40.0, phi3_deg = 45.0;
  int n = 12;
  app.add_option("--channel", channel_path, "channel JSON path");
  app.add_option("--model", model_path, "auxiliary model / input JSON path");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--seed", seed, "PRNG seed");
  app.add_option("--trials", trials, "trial or sample budget");
  app.add_option("--delta1", delta1, "Rx1 crossover probability");
  app.add_option("--tau", tau, "Hamming cost budget on x1");
  app.add_option("--delta", delta, "Rx2/Rx3 crossover probability");
  app.add_option("--phi2", phi2_deg, "Rx2 state angle in degrees");
  app.add_option("--phi3", phi3_deg, "Rx3 state angle in degrees");
  app.add_option("--n", n, "block length");

  auto* c_entropy = app.add_subcommand(
      "entropy", "von Neumann entropy of a density matrix (--model: matrix JSON)");
  auto* c_eval = app.add_subcommand(
      "region-eval", "feasibility of a rate point under a model's rate region");
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  c_eval->add_option("--r1", r1, "rate for Rx1");
  c_eval->add_option("--r2", r2, "rate for Rx2");
  c_eval->add_option("--r3", r3, "rate for Rx3");
  auto* c_search = app.add_subcommand(
      "region-search", "sample the feasible region of a model family");
  bool random_sampling = false;
  c_search->add_flag("--random", random_sampling,
                     "random sampling instead of an axis-aligned grid");
  auto* c_comm = app.add_subcommand("example-commutative",
                                    "worked example, commuting states");
  auto* c_nonc = app.add_subcommand("example-noncommuting",
                                    "worked example, non-commuting states");
  auto* c_srm = app.add_subcommand(
      "srm-lab", "sum-coset group decoder on the exact toy instance");
  auto* c_sim = app.add_subcommand(
      "simulate", "Monte-Carlo run of the commutative linear-code strategy");
  int k1 = 2, s = 0, t = 4;
  long m1 = 0;
  c_sim->add_option("--k1", k1, "Rx1 codebook exponent");
  c_sim->add_option("--m1", m1, "explicit Rx1 codebook size (overrides --k1)");
  c_sim->add_option("--s", s, "shared-code inner (bin) dimension");
  c_sim->add_option("--t", t, "shared-code outer (message) dimension");

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough(true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_entropy->parsed()) {
      if (model_path.empty())
        throw std::invalid_argument("entropy requires --model <matrix json>");
      const cqbc::DensityOperator rho =
          cqbc::validate(cqbc::matrix_from_json(load_json(model_path)));
      emit_text(fmt12(cqbc::von_neumann_entropy(rho)) + "\n", out_path);
      return 0;
    }

    if (c_eval->parsed()) {
      if (channel_path.empty() || model_path.empty())
        throw std::invalid_argument("region-eval requires --channel and --model");
      const cqbc::CqBroadcastChannel ch =
          cqbc::channel_from_json(load_json(channel_path));
      nlohmann::json mj = load_json(model_path);
      if (mj.contains("rates")) {
        r1 = mj["rates"].at(0).get<double>();
        r2 = mj["rates"].at(1).get<double>();
        r3 = mj["rates"].at(2).get<double>();
      }
      if (mj.contains("tau")) tau = mj["tau"].get<double>();
      const cqbc::AuxiliaryModel model = cqbc::model_from_json(
          mj.contains("model") ? mj["model"] : mj, &ch);
      const double cost = cqbc::expected_cost(model, ch);
      const cqbc::InequalitySystem sys = cqbc::build_system(model, ch);
      const cqbc::FeasibilityResult fr =
          cqbc::feasible(sys, cqbc::RatePoint{r1, r2, r3, tau});
      const bool ok =
          fr.status == cqbc::FeasStatus::Feasible && cost <= tau + 1e-12;
      std::ostringstream os;
      os << cqbc::region_csv({{model_path, r1, r2, r3, ok, fr.boundary}});
      emit_text(os.str(), out_path);
      if (fr.status == cqbc::FeasStatus::Indeterminate) {
        std::cerr << "LP indeterminate: " << fr.detail << "\n";
        return 1;
      }
      return 0;
    }

    if (c_search->parsed()) {
      if (channel_path.empty() || model_path.empty())
        throw std::invalid_argument("region-search requires --channel and --model");
      const cqbc::CqBroadcastChannel ch =
          cqbc::channel_from_json(load_json(channel_path));
      const nlohmann::json mj = load_json(model_path);
      std::vector<cqbc::ModelEntry> family;
      if (mj.is_array()) {
        for (const auto& entry : mj)
          family.push_back({entry.at("id").get<std::string>(),
                            cqbc::model_from_json(entry.at("model"), &ch)});
      } else {
        family.push_back({model_path, cqbc::model_from_json(mj, &ch)});
      }
      const cqbc::RegionResult res = cqbc::search_region(
          ch, family, static_cast<std::size_t>(trials), seed, !random_sampling);
      std::ostringstream os;
      os << cqbc::region_csv(res.samples);
      os << "# hull\n" << std::setprecision(12);
      for (const auto& p : res.hull)
        os << "# " << p[0] << "," << p[1] << "," << p[2] << "\n";
      emit_text(os.str(), out_path);
      return 0;
    }

    if (c_comm->parsed()) {
      cqbc::ExampleReport rep = cqbc::example_commutative(delta1, tau, delta);
      rep.json["spec"] = spec_echo(
          {{"delta1", delta1}, {"tau", tau}, {"delta", delta}});
      emit(rep.json, out_path);
      return 0;
    }

    if (c_nonc->parsed()) {
      const double phi2 = phi2_deg * kPi / 180.0;
      const double phi3 = phi3_deg * kPi / 180.0;
      cqbc::ExampleReport rep =
          cqbc::example_noncommuting(delta1, tau, phi2, phi3);
      rep.json["spec"] = spec_echo({{"delta1", delta1},
                                    {"tau", tau},
                                    {"phi2_deg", phi2_deg},
                                    {"phi3_deg", phi3_deg}});
      emit(rep.json, out_path);
      return 0;
    }

    if (c_srm->parsed()) {
      const cqbc::CqBroadcastChannel ch = cqbc::commutative_channel(delta1, delta);
      cqbc::NestedCosetCode c2{2, 3, 1, 1, {{1, 1, 0}}, {{0, 1, 1}}, {0, 0, 0}};
      cqbc::NestedCosetCode c3{2, 3, 1, 1, {{1, 1, 0}}, {{0, 1, 1}}, {1, 0, 0}};
      const cqbc::GroupDecoderResult res = cqbc::sum_group_decoder(
          ch, c2, c3,
          [](int u2, int u3) { return static_cast<std::size_t>(u2 * 2 + u3); });
      nlohmann::json j = {{"c2", cqbc::to_json(c2)},
                          {"c3", cqbc::to_json(c3)},
                          {"dim", res.dim},
                          {"group_error", res.group_error},
                          {"pair_then_sum_error", res.pair_error},
                          {"decoder", cqbc::to_json(res.decoder)},
                          {"spec", spec_echo({{"delta1", delta1}, {"delta", delta}})}};
      emit(j, out_path);
      return 0;
    }

    if (c_sim->parsed()) {
      cqbc::SimConfig cfg;
      cfg.n = n;
      cfg.delta1 = delta1;
      cfg.delta = delta;
      cfg.tau = tau;
      cfg.k1 = k1;
      cfg.m1 = m1;
      cfg.s = s;
      cfg.t = t;
      cfg.trials = trials;
      cfg.seed = seed;
      const cqbc::SimResult res = cqbc::run(cfg);
      emit_text(cqbc::sim_csv_header() + "\n" + cqbc::sim_csv_row(res) + "\n",
                out_path);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
