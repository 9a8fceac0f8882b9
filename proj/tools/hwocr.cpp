#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "hwocr/cost.hpp"
#include "hwocr/error.hpp"
#include "hwocr/evaluation.hpp"
#include "hwocr/indent_absolute.hpp"
#include "hwocr/indent_relative.hpp"
#include "hwocr/labels.hpp"
#include "hwocr/manifest.hpp"
#include "hwocr/ocr_adapters.hpp"
#include "hwocr/pipeline.hpp"
#include "hwocr/report.hpp"
#include "hwocr/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw hwocr::Error(hwocr::ErrorCode::IoError, "cannot open " + path.string());
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw hwocr::Error(hwocr::ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

int eval_run(const fs::path& manifest, const fs::path& config, const fs::path& out, const std::string& text_out,
             bool heldout_only, std::size_t workers, const std::string& labels_path) {
  const auto entries = hwocr::load_manifest(manifest);
  const auto configs = hwocr::load_pipeline_configs(config);
  std::vector<hwocr::HallucinationLabel> labels;
  if (!labels_path.empty()) labels = hwocr::load_labels(labels_path);

  std::vector<hwocr::ResultsRow> rows;
  for (const auto& c : configs) {
    hwocr::Pipeline pipeline(c);
    auto row = hwocr::run_evaluation(pipeline, entries, {heldout_only, workers});
    if (!labels.empty()) hwocr::apply_label_overrides(row, labels, entries);
    for (const auto& f : row.failures) {
      std::cerr << "warning: " << row.config_id << ": " << f.program_id << " failed: " << f.error << "\n";
    }
    rows.push_back(std::move(row));
  }
  const auto report = hwocr::emit_report(rows);
  write_text(out, report.machine_readable());
  const auto human = report.human_readable();
  fs::path text_path = text_out.empty() ? fs::path(out).replace_extension(".txt") : fs::path(text_out);
  write_text(text_path, human);
  std::cout << human;

  for (const auto& r : rows) {
    if (!r.failures.empty()) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Handwritten Python code OCR: indentation recovery, post-correction and evaluation"};
  app.require_subcommand(1);

  // eval ------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Evaluate pipelines, estimate cost, import labels");
  eval->require_subcommand(1);

  fs::path manifest, config, out;
  std::string text_out, labels_for_run;
  bool heldout_only = false;
  std::size_t workers = 0;
  auto* run = eval->add_subcommand("run", "Run every config in C over manifest M and write report R");
  run->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
  run->add_option("--config", config, "Pipeline config JSON")->required();
  run->add_option("--out", out, "Machine-readable report path")->required();
  run->add_option("--text-out", text_out, "Human-readable table path (default: <out>.txt)");
  run->add_flag("--heldout-only", heldout_only, "Skip entries used to fit indentation parameters");
  run->add_option("--workers", workers, "Worker threads (default: CPU count)");
  run->add_option("--labels", labels_for_run, "Human hallucination labels overriding the automatic screen");

  fs::path model_file;
  std::vector<double> counts;
  bool multimodal = false;
  auto* cost = eval->add_subcommand("cost", "Per-image cost estimate");
  cost->add_option("--model-file", model_file, "Cost model JSON")->required();
  cost->add_option("--counts", counts, "code_chars,instruction_chars,output_chars")
      ->required()
      ->delimiter(',')
      ->expected(3);
  cost->add_flag("--multimodal", multimodal, "Price the end-to-end image path");

  auto* labels_cmd = eval->add_subcommand("labels", "Hallucination label tools");
  labels_cmd->require_subcommand(1);
  fs::path labels_file, labels_manifest, labels_out;
  auto* import = labels_cmd->add_subcommand("import", "Tabulate hallucination labels per run");
  import->add_option("--file", labels_file, "Labels JSON")->required();
  import->add_option("--manifest", labels_manifest, "Manifest whose program ids the labels must use");
  import->add_option("--out", labels_out, "Write the table as JSON");

  // fixtures --------------------------------------------------------------
  auto* fixtures = app.add_subcommand("fixtures", "Recorded OCR fixtures");
  fixtures->require_subcommand(1);
  fs::path provider_file, fixtures_manifest, fixtures_out;
  auto* record = fixtures->add_subcommand("record", "Run a provider over every manifest image and record fixtures");
  record->add_option("--provider", provider_file, "Provider config JSON")->required();
  record->add_option("--manifest", fixtures_manifest, "Dataset manifest JSON")->required();
  record->add_option("--out", fixtures_out, "Fixture directory (default: fixtures/<provider_id>)");

  // gmm ---------------------------------------------------------------------
  auto* gmm = app.add_subcommand("gmm", "Indent / no-indent model tools");
  gmm->require_subcommand(1);
  fs::path samples_file, gmm_out;
  auto* fit = gmm->add_subcommand("fit", "Fit the two Gaussians from labelled deltas");
  fit->add_option("--samples", samples_file, R"(JSON {"samples": [{"delta": 0.08, "label": "indent"}]})")
      ->required();
  fit->add_option("--out", gmm_out, "Write fitted parameters here (default: stdout)");

  // indent ------------------------------------------------------------------
  fs::path indent_fixture, indent_gmm;
  std::string method = "relative";
  auto* indent = app.add_subcommand("indent", "Reconstruct indentation for one recorded OCR document");
  indent->add_option("--fixture", indent_fixture, "OcrDocument JSON")->required();
  indent->add_option("--method", method, "relative | absolute")->check(CLI::IsMember({"relative", "absolute"}));
  indent->add_option("--gmm", indent_gmm, "GMM parameters JSON (default: built-in estimates)");

  // serve -------------------------------------------------------------------
  fs::path serve_config;
  std::string data_dir = env_or("HWOCR_DATA_DIR", "hwocr-data");
  std::string listen = env_or("HWOCR_LISTEN", "127.0.0.1:8080");
  std::size_t max_upload_mib = 10;
  std::size_t serve_workers = 2;
  auto* serve = app.add_subcommand("serve", "HTTP service for the classroom review loop");
  serve->add_option("--config", serve_config, "Pipeline config JSON")->required();
  serve->add_option("--data-dir", data_dir, "Job storage (env HWOCR_DATA_DIR)");
  serve->add_option("--listen", listen, "host:port (env HWOCR_LISTEN)");
  serve->add_option("--max-upload-mib", max_upload_mib, "Upload size cap");
  serve->add_option("--workers", serve_workers, "Pipeline worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return eval_run(manifest, config, out, text_out, heldout_only, workers, labels_for_run);
    }
    if (cost->parsed()) {
      auto model = hwocr::load_cost_model(model_file);
      auto estimate = hwocr::estimate_cost(model, {counts[0], counts[1], counts[2]}, multimodal);
      std::cout << hwocr::to_json(estimate).dump(2) << "\n";
      return 0;
    }
    if (import->parsed()) {
      auto labels = hwocr::load_labels(labels_file);
      std::set<std::string> known;
      if (!labels_manifest.empty()) {
        for (const auto& e : hwocr::load_manifest(labels_manifest)) known.insert(e.program_id);
      } else {
        for (const auto& l : labels) known.insert(l.program_id);
      }
      auto table = hwocr::import_labels(labels, known);
      if (!labels_out.empty()) write_text(labels_out, table.to_json().dump(2) + "\n");
      std::cout << table.render();
      return 0;
    }
    if (record->parsed()) {
      auto provider_config = hwocr::provider_config_from_json(read_json(provider_file), provider_file.parent_path());
      auto provider = hwocr::make_provider(provider_config);
      auto dir = fixtures_out.empty() ? fs::path("fixtures") / provider_config.provider_id : fixtures_out;
      int failures = 0;
      for (const auto& entry : hwocr::load_manifest(fixtures_manifest)) {
        try {
          auto image = hwocr::load_image(entry.image_path);
          image.name = entry.program_id;
          hwocr::record_fixture(provider->recognize(image), dir / (entry.program_id + ".json"));
          std::cout << "recorded " << entry.program_id << "\n";
        } catch (const std::exception& e) {
          ++failures;
          std::cerr << "failed " << entry.program_id << ": " << e.what() << "\n";
        }
      }
      return failures ? 2 : 0;
    }
    if (fit->parsed()) {
      std::vector<hwocr::LabeledDelta> samples;
      const auto samples_json = read_json(samples_file);
      for (const auto& s : samples_json.at("samples")) {
        auto label = s.at("label").get<std::string>();
        samples.push_back({s.at("delta").get<double>(),
                           label == "indent" ? hwocr::DeltaLabel::Indent : hwocr::DeltaLabel::NoIndent});
      }
      auto text = hwocr::to_json(hwocr::fit_gmm_mle(samples)).dump(2) + "\n";
      if (gmm_out.empty()) {
        std::cout << text;
      } else {
        write_text(gmm_out, text);
      }
      return 0;
    }
    if (indent->parsed()) {
      auto doc = hwocr::normalize_reading_order(hwocr::load_fixture(indent_fixture));
      hwocr::GmmParams params;
      if (!indent_gmm.empty()) params = hwocr::gmm_params_from_json(read_json(indent_gmm));
      auto program = method == "absolute" ? hwocr::absolute_indent(doc) : hwocr::relative_indent(doc, params);
      std::cout << hwocr::render_program(program) << "\n";
      return 0;
    }
    if (serve->parsed()) {
      auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw hwocr::Error(hwocr::ErrorCode::InvalidConfig, "--listen needs host:port");
      const auto host = listen.substr(0, colon);
      const int port = std::stoi(listen.substr(colon + 1));
      hwocr::Service service({data_dir, max_upload_mib * 1024 * 1024, serve_workers},
                             hwocr::load_pipeline_configs(serve_config));
      httplib::Server server;
      service.mount(server);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << listen << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
