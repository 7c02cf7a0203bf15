// Copyright 2026 The harp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "harp/chain_resample.hpp"
#include "harp/distortion_model.hpp"
#include "harp/error.hpp"
#include "harp/image.hpp"
#include "harp/parallel.hpp"
#include "harp/pipeline.hpp"
#include "harp/plumbline.hpp"
#include "harp/straightness.hpp"
#include "harp/synth_harp.hpp"

namespace fs = std::filesystem;
using namespace harp;

namespace {

bool is_image_path(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  return ext == ".pgm" || ext == ".pnm" || ext == ".png";
}

struct ExtractFlags {
  double edge_threshold = kDefaultEdgeThreshold;
  int t = kDefaultSubsampleFactor;
  double merge_angle_deg = 3.0;
  double merge_gap = 100.0;
  double merge_offset = 3.0;
  double pre_blur = 1.4;
  double border_margin = 10.0;

  ExtractOptions options() const {
    ExtractOptions o;
    o.edge_threshold = edge_threshold;
    o.subsample_factor = t;
    o.merge.angle_tolerance = merge_angle_deg * M_PI / 180.0;
    o.merge.gap_tolerance = merge_gap;
    o.merge.offset_tolerance = merge_offset;
    o.pre_blur_sigma = pre_blur;
    o.border_margin = border_margin;
    return o;
  }
};

void add_extract_flags(CLI::App* cmd, ExtractFlags* flags) {
  cmd->add_option("--edge-threshold", flags->edge_threshold,
                  "gradient magnitude threshold for edge points")
      ->capture_default_str();
  cmd->add_option("--t", flags->t, "smoothing subsample factor")
      ->capture_default_str();
  cmd->add_option("--merge-angle", flags->merge_angle_deg,
                  "chain merge angle tolerance, degrees")
      ->capture_default_str();
  cmd->add_option("--merge-gap", flags->merge_gap,
                  "chain merge gap tolerance, px")
      ->capture_default_str();
  cmd->add_option("--merge-offset", flags->merge_offset,
                  "chain merge perpendicular tolerance, px")
      ->capture_default_str();
  cmd->add_option("--pre-blur", flags->pre_blur,
                  "image smoothing sigma before the gradient, px")
      ->capture_default_str();
  cmd->add_option("--border-margin", flags->border_margin,
                  "drop chains confined this close to one frame edge, px")
      ->capture_default_str();
}

// Warps with the model correction followed by the four-corner normalization
// homography, so that the output frame matches the input corners.
GrayImage correct_image_normalized(const DistortionModel& model,
                                   const GrayImage& img) {
  const Homography h = normalize_homography(
      [&](Vec2 p) { return model.correct(p); }, img.width, img.height);
  const Homography h_inv = h.inverse();

  GrayImage out = GrayImage::filled(img.width, img.height, 0.0);
  parallel_for_rows(img.height, [&](int j) {
    for (int i = 0; i < img.width; ++i) {
      double v = 0.0;
      try {
        const Vec2 corrected = apply_homography(
            h_inv, {static_cast<double>(i), static_cast<double>(j)});
        const Vec2 src = model.distort(corrected);
        v = sample_bilinear(img, src.x, src.y);
      } catch (const Error&) {
        v = 0.0;  // outside the invertible range
      }
      out.at(i, j) = v;
    }
  });
  return out;
}

int run_synth(const std::string& scene_path, const std::string& image_out,
              const std::string& model_out, const std::string& chains_out,
              int points_per_string, std::optional<std::uint64_t> seed,
              std::optional<int> supersample) {
  SceneFile sf = read_scene_file(scene_path);
  if (seed) sf.scene.seed = *seed;
  if (supersample) sf.scene.supersample = *supersample;

  if (!image_out.empty()) {
    const GrayImage img = render(sf.scene, sf.width, sf.height);
    save_image(img, image_out, 16);
  }
  if (!model_out.empty()) write_model_file(model_out, sf.scene.distortion);
  if (!chains_out.empty()) {
    const SynthChains synth =
        synth_chains(sf.scene, sf.width, sf.height, points_per_string);
    write_chains_file(chains_out, synth.chains);
  }
  return 0;
}

int run_extract(const std::vector<std::string>& inputs,
                const std::string& out_dir, const ExtractFlags& flags) {
  int failures = 0;
  for (const std::string& input : inputs) {
    try {
      const GrayImage img = load_image(input);
      const auto chains = extract_chains(img, flags.options());
      const fs::path out =
          fs::path(out_dir) / (fs::path(input).stem().string() + "_chains.txt");
      write_chains_file(out.string(), chains);
      if (chains.empty())
        std::cerr << "warning: no chains found in " << input << "\n";
      std::cout << input << ": " << chains.size() << " chains -> "
                << out.string() << "\n";
    } catch (const Error& e) {
      std::cerr << "error: " << input << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

int run_measure(const std::vector<std::string>& inputs,
                const std::string& model_path, int size_w, int size_h,
                const std::string& report_path, const ExtractFlags& flags) {
  std::optional<DistortionModel> model;
  if (!model_path.empty()) model = read_model_file(model_path);

  std::vector<std::vector<Vec2>> all;
  for (const std::string& input : inputs) {
    std::vector<std::vector<Vec2>> chains;
    int w = size_w, h = size_h;
    if (is_image_path(input)) {
      const GrayImage img = load_image(input);
      chains = extract_chains(img, flags.options());
      w = img.width;
      h = img.height;
    } else {
      chains = read_chains_file(input);
      if (model && (w < 2 || h < 2))
        throw ParameterError(
            "--image-size is required when measuring chain files against a "
            "model");
    }

    if (model) {
      const Homography norm_h = normalize_homography(
          [&](Vec2 p) { return model->correct(p); }, w, h);
      for (auto& chain : chains)
        for (Vec2& p : chain)
          p = apply_homography(norm_h, model->correct(p));
    }
    for (auto& chain : chains) all.push_back(std::move(chain));
  }

  if (all.empty()) throw DegenerateError("no chains to measure");
  const MeasurementReport report = rms_distance(all);
  write_report(std::cout, report);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw IoError("cannot write " + report_path);
    write_report(out, report);
  }
  return 0;
}

int run_calibrate(const std::vector<std::string>& chain_files,
                  const std::string& method, int order,
                  const std::string& center_mode, int width, int height,
                  const std::string& model_out, std::string log_path) {
  CalibrationProblem problem;
  for (const std::string& path : chain_files) {
    auto chains = read_chains_file(path);
    for (auto& c : chains) problem.chains.push_back(std::move(c));
  }
  problem.model_order = order;
  problem.center_mode =
      center_mode == "free" ? CenterMode::kFree : CenterMode::kFixed;
  problem.width = width;
  problem.height = height;

  CalibrationResult result;
  if (method == "D") {
    const DistortionModel init = DistortionModel::identity(
        image_center(width, height), default_radius_scale(width, height));
    result = minimize_D(problem, init);
  } else if (method == "E") {
    result = minimize_E_alternating(problem);
  } else {
    throw ParameterError("method must be D or E");
  }

  for (const std::string& w : result.warnings)
    std::cerr << "warning: " << w << "\n";

  write_model_file(model_out, result.model);
  if (log_path.empty()) log_path = model_out + ".log";
  {
    std::ofstream log(log_path);
    if (!log) throw IoError("cannot write " + log_path);
    log << "# method " << method << " order " << order << "\n";
    log << "# column: " << (method == "E" ? "algebraic energy per sweep"
                                          : "geometric energy per iteration")
        << "\n";
    char buf[64];
    for (std::size_t i = 0; i < result.energy_history.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", result.energy_history[i]);
      log << i << " " << buf << "\n";
    }
  }

  std::cout << "energy_initial = " << result.energy_initial << "\n";
  std::cout << "energy_final = " << result.energy_final << "\n";
  if (method == "E") {
    std::cout << "algebraic_initial = " << result.algebraic_initial << "\n";
    std::cout << "algebraic_final = " << result.algebraic_final << "\n";
  }
  std::cout << "iterations = " << result.iterations << "\n";
  std::cout << "converged = " << (result.converged ? "yes" : "no") << "\n";
  std::cout << "model -> " << model_out << "\n";
  return 0;
}

int run_correct(const std::vector<std::string>& inputs,
                const std::string& model_path, bool normalize,
                const std::string& out_dir) {
  const DistortionModel model = read_model_file(model_path);
  int failures = 0;
  for (const std::string& input : inputs) {
    try {
      const GrayImage img = load_image(input);
      const GrayImage out = normalize ? correct_image_normalized(model, img)
                                      : correct_image(model, img);
      const fs::path out_path =
          fs::path(out_dir) /
          (fs::path(input).stem().string() + "_corrected.pgm");
      save_image(out, out_path.string(), 16);
      std::cout << input << " -> " << out_path.string() << "\n";
    } catch (const Error& e) {
      std::cerr << "error: " << input << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

int run_diagnose(const std::string& chains_path, double sigma,
                 const std::string& report_path) {
  const auto chains = read_chains_file(chains_path);
  if (chains.empty()) throw DegenerateError("no chains in " + chains_path);

  std::ostringstream report;
  const double margin = 3.0 * sigma;
  double total_sq = 0.0;
  long long total_n = 0;
  for (std::size_t id = 0; id < chains.size(); ++id) {
    IntrinsicSignal hf;
    try {
      hf = high_frequency_component(chains[id], sigma);
    } catch (const DegenerateError& e) {
      throw DegenerateError("chain " + std::to_string(id) + ": " + e.what());
    }
    const double span = hf.s.back();
    double sq = 0.0, peak = 0.0;
    long long n = 0;
    for (std::size_t i = 0; i < hf.s.size(); ++i) {
      if (hf.s[i] < margin || hf.s[i] > span - margin) continue;
      sq += hf.v[i] * hf.v[i];
      peak = std::max(peak, std::fabs(hf.v[i]));
      ++n;
    }
    char buf[160];
    if (n == 0) {
      std::snprintf(buf, sizeof(buf),
                    "chain %zu n=%zu span too short for 3-sigma margins", id,
                    hf.s.size());
    } else {
      std::snprintf(buf, sizeof(buf),
                    "chain %zu n=%lld hf_rms=%.6g hf_max=%.6g", id, n,
                    std::sqrt(sq / n), peak);
      total_sq += sq;
      total_n += n;
    }
    report << buf << "\n";
  }
  if (total_n > 0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "hf_rms_all = %.6g",
                  std::sqrt(total_sq / total_n));
    report << buf << "\n";
  }

  std::cout << report.str();
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw IoError("cannot write " + report_path);
    out << report.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "harp: camera lens distortion measurement and correction from "
      "photographs of stretched strings"};
  app.require_subcommand(1);

  // synth
  std::string synth_scene, synth_image, synth_model, synth_chains_path;
  int synth_pps = 500;
  std::uint64_t synth_seed = 0;
  int synth_ss = 0;
  auto* synth_cmd =
      app.add_subcommand("synth", "render a synthetic scene with ground truth");
  synth_cmd->add_option("scene", synth_scene, "scene description file")
      ->required();
  synth_cmd->add_option("--image", synth_image, "output image (PGM)");
  synth_cmd->add_option("--model-out", synth_model, "ground-truth model file");
  synth_cmd->add_option("--chains-out", synth_chains_path,
                        "ground-truth chain file (point-level, no rendering)");
  synth_cmd
      ->add_option("--points-per-string", synth_pps,
                   "points per chain for --chains-out")
      ->capture_default_str();
  auto* seed_opt = synth_cmd->add_option("--seed", synth_seed,
                                         "override the scene noise seed");
  auto* ss_opt = synth_cmd->add_option("--supersample", synth_ss,
                                       "override the scene supersampling");

  // extract
  std::vector<std::string> extract_inputs;
  std::string extract_dir = ".";
  ExtractFlags extract_flags;
  auto* extract_cmd =
      app.add_subcommand("extract", "detect string edge chains in images");
  extract_cmd->add_option("images", extract_inputs, "input images")
      ->required();
  extract_cmd->add_option("--out-dir", extract_dir, "output directory")
      ->capture_default_str();
  add_extract_flags(extract_cmd, &extract_flags);

  // measure
  std::vector<std::string> measure_inputs;
  std::string measure_model, measure_report;
  std::vector<int> measure_size;
  ExtractFlags measure_flags;
  auto* measure_cmd = app.add_subcommand(
      "measure", "measure straightness (d_rms, d_max) of chains or images");
  measure_cmd
      ->add_option("inputs", measure_inputs, "chain files and/or images")
      ->required();
  measure_cmd->add_option("--model", measure_model,
                          "correct chains with this model before measuring");
  measure_cmd
      ->add_option("--image-size", measure_size,
                   "width height of the frame for chain-file inputs")
      ->expected(2);
  measure_cmd->add_option("--report", measure_report, "write the report here");
  add_extract_flags(measure_cmd, &measure_flags);

  // calibrate
  std::vector<std::string> cal_inputs;
  std::string cal_method = "D";
  std::string cal_center = "fixed";
  std::string cal_model_out = "model.txt";
  std::string cal_log;
  int cal_order = 4;
  int cal_width = 0, cal_height = 0;
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "estimate a radial correction from distorted chains");
  cal_cmd->add_option("chains", cal_inputs, "chain files")->required();
  cal_cmd->add_option("--method", cal_method, "estimator: D or E")
      ->check(CLI::IsMember({"D", "E"}))
      ->capture_default_str();
  cal_cmd->add_option("--order", cal_order, "polynomial order N")
      ->capture_default_str();
  cal_cmd->add_option("--center", cal_center, "distortion center: fixed|free")
      ->check(CLI::IsMember({"fixed", "free"}))
      ->capture_default_str();
  cal_cmd->add_option("--width", cal_width, "frame width, px")->required();
  cal_cmd->add_option("--height", cal_height, "frame height, px")->required();
  cal_cmd->add_option("--model-out", cal_model_out, "output model file")
      ->capture_default_str();
  cal_cmd->add_option("--log", cal_log,
                      "energy log (default: <model-out>.log)");

  // correct
  std::vector<std::string> cor_inputs;
  std::string cor_model, cor_dir = ".";
  bool cor_normalize = false;
  auto* cor_cmd =
      app.add_subcommand("correct", "undistort images with a model");
  cor_cmd->add_option("images", cor_inputs, "input images")->required();
  cor_cmd->add_option("--model", cor_model, "model file")->required();
  cor_cmd->add_flag("--normalize", cor_normalize,
                    "compose the four-corner normalization homography");
  cor_cmd->add_option("--out-dir", cor_dir, "output directory")
      ->capture_default_str();

  // diagnose
  std::string diag_input, diag_report;
  double diag_sigma = kDiagnosticSigma;
  auto* diag_cmd = app.add_subcommand(
      "diagnose", "per-chain high-frequency report (string quality)");
  diag_cmd->add_option("chains", diag_input, "chain file")->required();
  diag_cmd->add_option("--sigma", diag_sigma, "smoothing sigma, px")
      ->capture_default_str();
  diag_cmd->add_option("--report", diag_report, "write the report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      return run_synth(synth_scene, synth_image, synth_model,
                       synth_chains_path, synth_pps,
                       seed_opt->count() ? std::optional(synth_seed)
                                         : std::nullopt,
                       ss_opt->count() ? std::optional(synth_ss)
                                       : std::nullopt);
    }
    if (extract_cmd->parsed())
      return run_extract(extract_inputs, extract_dir, extract_flags);
    if (measure_cmd->parsed()) {
      const int w = measure_size.size() == 2 ? measure_size[0] : 0;
      const int h = measure_size.size() == 2 ? measure_size[1] : 0;
      return run_measure(measure_inputs, measure_model, w, h, measure_report,
                         measure_flags);
    }
    if (cal_cmd->parsed())
      return run_calibrate(cal_inputs, cal_method, cal_order, cal_center,
                           cal_width, cal_height, cal_model_out, cal_log);
    if (cor_cmd->parsed())
      return run_correct(cor_inputs, cor_model, cor_normalize, cor_dir);
    if (diag_cmd->parsed())
      return run_diagnose(diag_input, diag_sigma, diag_report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
