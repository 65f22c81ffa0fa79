// Copyright 2026 The mpq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpq/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mpq/error.hpp"
#include "mpq/importance.hpp"
#include "mpq/metrics.hpp"
#include "mpq/quantize_model.hpp"
#include "mpq/synth.hpp"

namespace mpq::cli {

namespace {

struct QuantizeArgs {
  std::string model;
  std::string out;
  std::string report;
  QuantConfig config;
};

struct SweepArgs {
  std::string model;
  std::string out;
  std::vector<double> alphas{5, 10, 15, 20, 25, 30, 40};
  ImportanceConfig importance;
};

struct GenArgs {
  std::string arch;
  std::string dist = "gaussian";
  double sigma = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

// Out-of-range flag values are usage errors, not data errors.
class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_importance_flags(CLI::App* cmd, ImportanceConfig& cfg, bool with_alpha) {
  if (with_alpha) {
    cmd->add_option("--alpha", cfg.alpha, "percentage of layers marked important")
        ->required()
        ->check(CLI::Range(0.0, 100.0));
  }
  cmd->add_option("--beta", cfg.beta, "fraction of channels marked important in important layers")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--bits-important", cfg.high_bits, "bit-width of important channels")
      ->required()
      ->check(CLI::Range(2, 32));
  cmd->add_option("--bits-other", cfg.low_bits, "bit-width of the remaining channels")
      ->required()
      ->check(CLI::Range(2, 32));
}

void check_bit_order(const ImportanceConfig& cfg) {
  if (cfg.high_bits < cfg.low_bits) {
    throw UsageError("--bits-important must be >= --bits-other");
  }
}

ReportFormat format_for_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".csv" ? ReportFormat::csv : ReportFormat::json;
}

void inspect(const std::string& path, std::ostream& out) {
  const std::string magic = peek_magic(path);
  if (magic == kBundleMagic) {
    const ModelBundle b = load_bundle(path);
    out << "float bundle '" << b.model_name << "': " << b.layers.size() << " layers, "
        << b.weight_count() << " params, " << format_double(to_mbit(uniform_size_bits(b, 32)))
        << " Mbit\n";
    out << "layer kind m n k params F_l\n";
    for (const auto& layer : b.layers) {
      const auto& s = layer.shape;
      out << layer.index << ' ' << to_string(s.kind) << ' ' << s.out_channels << ' '
          << s.in_channels << ' ' << s.kernel_size << ' ' << s.weight_count() << ' '
          << format_double(layer_score(b.tensor_for(layer))) << '\n';
    }
    return;
  }
  if (magic == kQuantizedMagic) {
    const QuantizedModel q = load_quantized(path);
    std::uint64_t params = 0;
    for (const auto& l : q.layers) params += l.weight_count();
    const std::uint64_t bits = model_size_bits(q);
    out << "quantized model '" << q.source_model_name << "': " << q.layers.size() << " layers, "
        << params << " params, " << format_double(to_mbit(bits)) << " Mbit codes + "
        << format_double(to_mbit(overhead_bits(q))) << " Mbit overhead ("
        << format_double(size_reduction_pct(bits, params * 32)) << "% reduction)\n";
    out << "layer kind m n k params bits p l\n";
    for (const auto& l : q.layers) {
      const auto& s = l.layer.shape;
      std::map<int, int> hist;
      for (int b : l.channel_bits) ++hist[b];
      std::string h;
      for (const auto& [b, n] : hist) h += (h.empty() ? "" : ";") + std::to_string(b) + ':' + std::to_string(n);
      out << l.layer.index << ' ' << to_string(s.kind) << ' ' << s.out_channels << ' '
          << s.in_channels << ' ' << s.kernel_size << ' ' << l.weight_count() << ' ' << h << ' '
          << format_double(l.breakpoint) << ' ' << format_double(l.bound) << '\n';
    }
    return;
  }
  throw Error(Errc::bad_magic, "'" + path + "' is neither a PTQB nor a PTQQ file");
}

void quantize(const QuantizeArgs& a, std::ostream& out) {
  check_bit_order(a.config.importance);
  a.config.validate();
  const ModelBundle bundle = load_bundle(a.model);
  const ImportancePartition part = partition(bundle, a.config.importance);
  QuantizedModel q = quantize_model(bundle, part, {a.config.grid_size, 0});
  q.config = a.config;
  save_quantized(q, a.out);
  const QuantReport report = make_report(bundle, q, a.config.act_bits);
  emit_report(report, a.report, format_for_path(a.report));
  out << "quantized " << bundle.layers.size() << " layers: "
      << format_double(to_mbit(report.quantized_bits)) << " Mbit ("
      << format_double(report.size_reduction_pct) << "% reduction), total MSE "
      << format_double(report.total_mse) << '\n';
}

void sweep(const SweepArgs& a, std::ostream& out) {
  check_bit_order(a.importance);
  const ModelBundle bundle = load_bundle(a.model);
  ImportanceConfig cfg = a.importance;
  cfg.alpha = 0;
  const ImportancePartition scored = partition(bundle, cfg);

  std::ofstream csv(a.out, std::ios::trunc);
  if (!csv) throw Error(Errc::io_failure, "cannot create '" + a.out + "'");
  csv << "# total_mse is the weight reconstruction MSE; it stands in for accuracy, which is not evaluated\n";
  csv << "alpha,size_mbit,total_mse,total_bops\n";
  constexpr int kSweepActBits = 8;
  for (double alpha : a.alphas) {
    cfg.alpha = alpha;
    cfg.validate();
    const ImportancePartition part = partition(scored.layer_scores, scored.channel_scores, cfg);
    const QuantizedModel q = quantize_model(bundle, part);
    const MseReport mse = mse_report(bundle, q);
    csv << format_double(alpha) << ',' << format_double(to_mbit(model_size_bits(q))) << ','
        << format_double(mse.total.mse()) << ','
        << format_double(bops_model(bundle, part.channel_bits, kSweepActBits)) << '\n';
  }
  csv.flush();
  if (!csv) throw Error(Errc::io_failure, "write failed on '" + a.out + "'");
  out << "wrote " << a.alphas.size() << " sweep rows to " << a.out << '\n';
}

void gen(const GenArgs& a, std::ostream& out) {
  const ArchDescriptor arch = resolve_arch(a.arch);
  const Distribution dist{parse_dist_kind(a.dist), a.sigma};
  const ModelBundle bundle = gen_model(arch, dist, a.seed);
  save_bundle(bundle, a.out);
  out << "generated '" << arch.name << "': " << bundle.layers.size() << " layers, "
      << bundle.weight_count() << " params\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Post-training mixed-precision piecewise weight quantization", "mpq"};
  app.require_subcommand(1);

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a .ptqb or .ptqq file");
  inspect_cmd->add_option("file", inspect_path)->required();

  QuantizeArgs qa;
  auto* quantize_cmd = app.add_subcommand("quantize", "partition, quantize and report");
  quantize_cmd->add_option("--model", qa.model, "input .ptqb")->required();
  add_importance_flags(quantize_cmd, qa.config.importance, true);
  quantize_cmd->add_option("--act-bits", qa.config.act_bits, "activation bit-width for BOPs")
      ->capture_default_str()
      ->check(CLI::Range(1, 32));
  quantize_cmd->add_option("--out", qa.out, "output .ptqq")->required();
  quantize_cmd->add_option("--report", qa.report, "report path (.json or .csv)")->required();
  quantize_cmd->add_option("--grid", qa.config.grid_size, "breakpoint grid size")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 24));
  quantize_cmd->add_flag("--normalize-fl", qa.config.importance.normalize_layer_score,
                         "divide layer scores by weight count");

  std::string deq_model, deq_out;
  auto* deq_cmd = app.add_subcommand("dequantize", "decode a .ptqq into a float bundle");
  deq_cmd->add_option("--model", deq_model, "input .ptqq")->required();
  deq_cmd->add_option("--out", deq_out, "output .ptqb")->required();

  std::string rep_original, rep_quantized, rep_format = "json";
  auto* report_cmd = app.add_subcommand("report", "metrics of a quantized model to stdout");
  report_cmd->add_option("--original", rep_original, "original .ptqb")->required();
  report_cmd->add_option("--quantized", rep_quantized, "quantized .ptqq")->required();
  report_cmd->add_option("--format", rep_format)
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "size / MSE / BOPs over a list of alphas");
  sweep_cmd->add_option("--model", sa.model, "input .ptqb")->required();
  sweep_cmd->add_option("--alphas", sa.alphas, "comma-separated alpha list")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 100.0));
  add_importance_flags(sweep_cmd, sa.importance, false);
  sweep_cmd->add_option("--out", sa.out, "output CSV")->required();

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic bell-shaped model");
  gen_cmd->add_option("--arch", ga.arch, "resnet50-like, mobilenetv2-like or a descriptor file")
      ->required();
  gen_cmd->add_option("--dist", ga.dist)
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "laplace", "uniform"}));
  gen_cmd->add_option("--sigma", ga.sigma, "sigma / scale / half-width of the distribution")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", ga.seed)->capture_default_str();
  gen_cmd->add_option("--out", ga.out, "output .ptqb")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*inspect_cmd) {
      inspect(inspect_path, out);
    } else if (*quantize_cmd) {
      quantize(qa, out);
    } else if (*deq_cmd) {
      const ModelBundle b = dequantize_model(load_quantized(deq_model));
      save_bundle(b, deq_out);
      out << "decoded " << b.layers.size() << " layers to " << deq_out << '\n';
    } else if (*report_cmd) {
      const ModelBundle original = load_bundle(rep_original);
      const QuantizedModel q = load_quantized(rep_quantized);
      emit_report(make_report(original, q), out, parse_report_format(rep_format));
    } else if (*sweep_cmd) {
      sweep(sa, out);
    } else if (*gen_cmd) {
      gen(ga, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::invalid_argument ? kExitUsage : kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mpq::cli
