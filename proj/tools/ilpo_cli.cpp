// Command-line front end: experiments emit CSV to --out (or stdout), scalar
// summaries go to stderr. Exit status 0 on success, 1 when a check or an
// argument fails validation, 2 on unreadable/unwritable files or bad syntax.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ilpo/error.hpp"
#include "ilpo/experiments.hpp"
#include "ilpo/io.hpp"
#include "ilpo/layer.hpp"

namespace {

constexpr int kValidationFailure = 1;
constexpr int kIoFailure = 2;

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--K", "'" + item + "' is not an integer");
    }
    if (used != item.size() || k < 1) throw CLI::ValidationError("--K", "'" + item + "' is not a positive integer");
    out.push_back(k);
  }
  if (out.empty()) throw CLI::ValidationError("--K", "empty list");
  return out;
}

ilpo::Pooling parse_pooling(const std::string& name) {
  if (name == "softmax") return ilpo::Pooling::softmax;
  if (name == "hardmax") return ilpo::Pooling::hardmax;
  if (name == "linear") return ilpo::Pooling::linear;
  throw CLI::ValidationError("--pooling", "unknown pooling '" + name + "'");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ilpo::IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ilpo::IoError("write failed on '" + path + "'");
}

int finish(const ilpo::ExperimentReport& rep, const std::string& out) {
  emit(rep.to_csv(), out);
  for (const auto& [key, value] : rep.summary) std::cerr << rep.name << " " << key << "=" << ilpo::format_double(value) << "\n";
  if (!rep.passed) {
    std::cerr << rep.name << ": check failed\n";
    return kValidationFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ILPO orientation-pooled convolution: experiments and file tools"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out;
  int L = 3;
  std::string k_text;
  auto common = [&](CLI::App* sub, bool with_k) {
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out, "Output path (stdout when omitted for text outputs)");
    sub->add_option("--L", L, "Band limit / filter size");
    if (with_k) sub->add_option("--K", k_text, "SO(3) grid size, an integer or a comma list");
  };

  std::string input_path, filter_path, pooling_name = "softmax", padding_name = "same";
  int trials = 100, N = 9, functions = 50, instances = 20, channels = 1, d_in = 1, d_out = 1;
  double C = 1.0, eps = 0.1, scale = 1.0;

  CLI::App* conv = app.add_subcommand("conv", "Run the layer forward pass on a voxel file");
  common(conv, true);
  conv->add_option("--input", input_path, "ILPOVOX1 input grid")->required();
  conv->add_option("--filter", filter_path, "ILPOFILT1 filter file")->required();
  conv->add_option("--pooling", pooling_name, "softmax | hardmax");
  conv->add_option("--padding", padding_name, "same | valid");

  CLI::App* inv = app.add_subcommand("invariance", "Spread of sampled maxima over rotated copies");
  common(inv, true);
  inv->add_option("--trials", trials, "Number of random rotations");

  CLI::App* law = app.add_subcommand("error-law", "Pooling error against grid size");
  common(law, true);
  law->add_option("--trials", trials, "Number of random functions");
  law->add_option("--pooling", pooling_name, "softmax | hardmax");

  CLI::App* avg = app.add_subcommand("avg-collapse", "Rotation average versus radial-filter convolution");
  common(avg, true);
  avg->add_option("--N", N, "Input edge length");

  CLI::App* oracle = app.add_subcommand("oracle-check", "Reconstruction versus rotated-filter convolution");
  common(oracle, true);
  oracle->add_option("--N", N, "Input edge length");

  CLI::App* bound = app.add_subcommand("bound-check", "Closed-form grid size versus empirical requirement");
  common(bound, false);
  bound->add_option("--C", C, "Function norm");
  bound->add_option("--eps", eps, "Target sampled-max error");
  bound->add_option("--functions", functions, "Number of random functions");

  CLI::App* dump = app.add_subcommand("filter-dump", "Sample filter values per shell on a 36 x 18 angle grid");
  common(dump, false);
  dump->add_option("--filter", filter_path, "ILPOFILT1 filter file")->required();

  CLI::App* grad = app.add_subcommand("gradcheck", "Analytic gradients versus central differences");
  common(grad, true);
  grad->add_option("--pooling", pooling_name, "softmax | hardmax | linear");
  grad->add_option("--instances", instances, "Number of seeded instances");

  CLI::App* rfilt = app.add_subcommand("random-filter", "Write a random filter file");
  common(rfilt, false);
  rfilt->add_option("--d-in", d_in, "Input channels");
  rfilt->add_option("--d-out", d_out, "Output channels");
  rfilt->add_option("--scale", scale, "Coefficient standard deviation");

  CLI::App* rvox = app.add_subcommand("random-input", "Write a random cubic voxel grid");
  common(rvox, false);
  rvox->add_option("--channels", channels, "Channels");
  rvox->add_option("--N", N, "Edge length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ValidationError& e) {
    return app.exit(e) == 0 ? 0 : kValidationFailure;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kIoFailure;
  }

  try {
    const auto ks = [&](const std::string& fallback) { return parse_k_list(k_text.empty() ? fallback : k_text); };

    if (*conv) {
      ilpo::IlpoLayerConfig cfg;
      cfg.L = L;
      cfg.pooling = parse_pooling(pooling_name);
      if (cfg.pooling == ilpo::Pooling::linear) throw CLI::ValidationError("--pooling", "conv supports softmax or hardmax");
      if (padding_name == "same") {
        cfg.padding = ilpo::Padding::same;
      } else if (padding_name == "valid") {
        cfg.padding = ilpo::Padding::valid;
      } else {
        throw CLI::ValidationError("--padding", "unknown padding '" + padding_name + "'");
      }
      if (!k_text.empty()) cfg.K = ks("")[0];
      const ilpo::VoxelGrid input = ilpo::read_voxel_grid(input_path);
      const ilpo::FilterCoefficients c = ilpo::read_filter(filter_path);
      cfg.L = c.L();
      if (out.empty()) throw CLI::ValidationError("--out", "conv needs an output path");
      const ilpo::StagedForward res = ilpo::run_conv(input, c, cfg);
      ilpo::write_voxel_grid(out, res.output);
      for (const auto& [stage, secs] : res.stage_seconds) {
        std::printf("%s %.6f s\n", stage.c_str(), secs);
      }
      return 0;
    }
    if (*inv) return finish(ilpo::run_invariance(L, ks("3,4,5,6,7,8,9,10,11,12"), trials, seed), out);
    if (*law) {
      if (trials == 100 && law->count("--trials") == 0) trials = 20;
      return finish(ilpo::run_error_law(L, ks("4,5,6,7,8,9,10,11,12,13,14,15,16"), trials, seed,
                                        parse_pooling(pooling_name)),
                    out);
    }
    if (*avg) return finish(ilpo::run_avg_collapse(seed, N, L, ks(std::to_string(L))[0]), out);
    if (*oracle) return finish(ilpo::run_oracle_check(seed, N, L, ks("4")[0]), out);
    if (*bound) return finish(ilpo::run_bound_check(L, C, eps, seed, functions), out);
    if (*dump) return finish(ilpo::run_filter_dump(ilpo::read_filter(filter_path)), out);
    if (*grad) {
      ilpo::IlpoLayerConfig cfg;
      cfg.L = L;
      cfg.pooling = parse_pooling(pooling_name);
      if (!k_text.empty()) cfg.K = ks("")[0];
      return finish(ilpo::run_gradcheck(seed, instances, cfg), out);
    }
    if (*rfilt) {
      if (out.empty()) throw CLI::ValidationError("--out", "random-filter needs an output path");
      ilpo::write_filter(out, ilpo::random_filter(seed, L, d_in, d_out, scale));
      return 0;
    }
    if (*rvox) {
      if (out.empty()) throw CLI::ValidationError("--out", "random-input needs an output path");
      std::mt19937_64 rng(seed);
      ilpo::write_voxel_grid(out, ilpo::random_voxels(rng, channels, N));
      return 0;
    }
  } catch (const ilpo::FormatError& e) {
    std::cerr << "error: " << e.what() << " [field " << e.field();
    if (e.offset() >= 0) std::cerr << ", byte " << e.offset();
    std::cerr << "]\n";
    return kIoFailure;
  } catch (const ilpo::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  return 0;
}
