// SPDX-License-Identifier: Apache-2.0

#include "focusagent/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "focusagent/error.hpp"
#include "focusagent/live_session.hpp"
#include "focusagent/moderator.hpp"
#include "focusagent/session_config.hpp"
#include "focusagent/simulation.hpp"
#include "focusagent/speech_eval.hpp"
#include "focusagent/transcript_store.hpp"
#include "focusagent/ws_server.hpp"
#include "text_util.hpp"

namespace focusagent {

namespace {

struct BackendFlags {
  std::string kind = "scripted";
  std::string script;
  std::string endpoint;
  std::string model;
  double timeout = 60.0;
  int retries = 2;
};

void add_backend_flags(CLI::App& cmd, BackendFlags& f) {
  cmd.add_option("--backend", f.kind, "Chat backend")
      ->check(CLI::IsMember({"scripted", "http"}))
      ->capture_default_str();
  cmd.add_option("--script", f.script, "Fixture directory or .jsonl script (scripted backend)");
  cmd.add_option("--endpoint", f.endpoint, "Chat-completions URL (http backend)");
  cmd.add_option("--model", f.model, "Model name (http backend)");
  cmd.add_option("--timeout", f.timeout, "Request timeout in seconds")->capture_default_str();
  cmd.add_option("--retries", f.retries, "Retries on transient failures")->capture_default_str();
}

BackendConfig backend_config(const BackendFlags& f) {
  BackendConfig c;
  if (f.kind == "scripted") {
    if (f.script.empty()) throw CLI::ValidationError("--script", "required by the scripted backend");
    c = load_scripted_fixtures(f.script);
  } else {
    c.kind = BackendKind::http;
    if (f.endpoint.empty() || f.model.empty()) {
      throw CLI::ValidationError("--endpoint/--model", "required by the http backend");
    }
    c.endpoint = f.endpoint;
    c.model_name = f.model;
    if (const char* key = std::getenv("FOCUSAGENT_API_KEY"); key && *key) c.api_key = key;
  }
  c.request_timeout_seconds = f.timeout;
  c.max_retries = f.retries;
  return c;
}

const PromptLibrary& prompts_from(const std::string& dir, std::optional<PromptLibrary>& holder) {
  if (dir.empty()) return PromptLibrary::builtin();
  holder = PromptLibrary::from_directory(dir);
  return *holder;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error(ErrorKind::io_error, "cannot write " + path);
}

class ProgressPrinter final : public SimulationObserver {
 public:
  explicit ProgressPrinter(std::ostream& err) : err_(err) {}
  void on_stage_started(const Stage& stage) override {
    err_ << "== stage " << stage.index + 1 << ": " << stage.title << "\n";
  }
  void on_utterance(const Utterance& u, std::string_view speaker) override {
    err_ << "[" << u.sequence << "] " << speaker << ": " << u.text << "\n";
  }

 private:
  std::ostream& err_;
};

std::string format_wer(const WerResult& r) {
  std::ostringstream s;
  s << "S=" << r.substitutions << " D=" << r.deletions << " I=" << r.insertions
    << " N=" << r.reference_length << " rate=" << detail::format_number(r.rate);
  return s.str();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Focus-group moderation engine", "focusagent"};
  app.require_subcommand(1);

  BackendFlags backend;
  std::string config_path;
  std::string out_path;
  std::string prompts_dir;
  std::uint64_t seed = 0;
  bool verbose = false;

  auto* simulate = app.add_subcommand("simulate", "Run a simulated focus group");
  simulate->add_option("--config", config_path, "Session config (TOML)")->required();
  add_backend_flags(*simulate, backend);
  simulate->add_option("--seed", seed, "Seed passed to the backend")->capture_default_str();
  simulate->add_option("--out", out_path, "Transcript file (.fgt.jsonl); stdout when omitted");
  simulate->add_option("--prompts", prompts_dir, "Directory overriding prompt templates");
  simulate->add_flag("-v,--verbose", verbose, "Print utterances to stderr as they happen");

  std::string address = "0.0.0.0";
  int port = 8080;
  int min_participants = 1;
  auto* serve = app.add_subcommand("serve", "Host a live session over WebSocket");
  serve->add_option("--config", config_path, "Session config (TOML)")->required();
  serve->add_option("--port", port, "Listening port")->check(CLI::Range(0, 65535))->capture_default_str();
  serve->add_option("--address", address, "Listening address")->capture_default_str();
  serve->add_option("--out", out_path, "Transcript file written when the session ends");
  serve->add_option("--min-participants", min_participants, "Participants needed to start")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--prompts", prompts_dir, "Directory overriding prompt templates");
  add_backend_flags(*serve, backend);

  auto* plan = app.add_subcommand("plan", "Print the discussion plan without running");
  plan->add_option("--config", config_path, "Session config (TOML)")->required();
  plan->add_option("--prompts", prompts_dir, "Directory overriding prompt templates");
  add_backend_flags(*plan, backend);

  std::string ref_path, hyp_path;
  auto* eval_wer = app.add_subcommand("eval-wer", "Word error rate of a hypothesis transcript");
  eval_wer->add_option("--ref", ref_path, "Reference text file")->required();
  eval_wer->add_option("--hyp", hyp_path, "Hypothesis text file")->required();

  std::string embeddings_path, voiceprints_path, truth_path, report_path;
  double tau = kDefaultSpeakerTau;
  auto* eval_diarize = app.add_subcommand("eval-diarize", "Speaker identification from embeddings");
  eval_diarize->add_option("--embeddings", embeddings_path, "One vector per segment")
      ->required();
  eval_diarize->add_option("--voiceprints", voiceprints_path, "persona<TAB>vector lines")
      ->required();
  eval_diarize->add_option("--truth", truth_path, "One true persona id per segment")
      ->required();
  eval_diarize->add_option("--tau", tau, "Minimum similarity for a match")
      ->check(CLI::Range(-1.0, 1.0))
      ->capture_default_str();
  eval_diarize->add_option("--report", report_path, "Report file (JSONL); stdout when omitted");
  eval_diarize->add_option("--ref", ref_path, "Reference transcript for a WER summary");
  eval_diarize->add_option("--hyp", hyp_path, "Hypothesis transcript for a WER summary");

  std::string in_path;
  auto* export_cmd = app.add_subcommand("export", "Convert a transcript to plain-text minutes");
  export_cmd->add_option("--in", in_path, "Transcript file (.fgt.jsonl)")->required();
  export_cmd->add_option("--config", config_path, "Session config used to resolve names");
  export_cmd->add_option("--out", out_path, "Minutes file; stdout when omitted");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::optional<PromptLibrary> prompt_holder;
    if (simulate->parsed()) {
      const auto config = load_session_config(config_path);
      const auto& prompts = prompts_from(prompts_dir, prompt_holder);
      ProgressPrinter printer(err);
      const auto outcome =
          run_simulation(config, backend_config(backend), seed, prompts, verbose ? &printer : nullptr);
      if (out_path.empty()) {
        out << encode_transcript(outcome.transcript);
      } else {
        persist_transcript(outcome.transcript, out_path);
        out << "wrote " << outcome.transcript.utterances.size() << " utterances in "
            << outcome.transcript.plan.stages.size() << " stages to " << out_path << "\n";
      }
    } else if (serve->parsed()) {
      const auto config = load_session_config(config_path);
      const auto& prompts = prompts_from(prompts_dir, prompt_holder);
      auto chat = make_backend(backend_config(backend));
      const auto discussion = plan_stages(config, *chat, prompts);
      SystemClock clock;
      LiveSession session(config, discussion, *chat, clock, LiveOptions{min_participants}, prompts);
      ServerOptions options;
      options.address = address;
      options.port = static_cast<unsigned short>(port);
      if (!out_path.empty()) options.out = out_path;
      options.handle_signals = true;
      WsServer server(session, options);
      err << "listening on " << address << ":" << server.port() << "\n";
      server.run();
      if (!out_path.empty()) out << "wrote transcript to " << out_path << "\n";
    } else if (plan->parsed()) {
      const auto config = load_session_config(config_path);
      const auto& prompts = prompts_from(prompts_dir, prompt_holder);
      auto chat = make_backend(backend_config(backend));
      const auto discussion = plan_stages(config, *chat, prompts);
      for (const auto& s : discussion.stages) {
        out << "Stage " << s.index + 1 << ": " << s.title << " ("
            << detail::format_number(s.allocated_minutes) << " min)\n  " << s.objective << "\n";
      }
    } else if (eval_wer->parsed()) {
      const auto result = wer(normalize_tokens(read_text(ref_path)),
                              normalize_tokens(read_text(hyp_path)));
      out << format_wer(result) << "\n";
    } else if (eval_diarize->parsed()) {
      if (ref_path.empty() != hyp_path.empty()) {
        throw CLI::ValidationError("--ref/--hyp", "give both or neither");
      }
      const auto embeddings = load_embeddings(embeddings_path);
      const auto voiceprints = load_voiceprints(voiceprints_path);
      const auto truth = load_labels(truth_path);
      auto report = evaluate_diarization(embeddings, voiceprints, truth, tau);
      if (!ref_path.empty()) {
        report.wer = wer(normalize_tokens(read_text(ref_path)), normalize_tokens(read_text(hyp_path)));
      }
      const auto encoded = encode_report(report);
      if (report_path.empty()) {
        out << encoded;
      } else {
        write_text(report_path, encoded);
        out << "micro_f1=" << detail::format_number(report.micro_f1) << " segments="
            << report.records.size() << "\n";
      }
    } else if (export_cmd->parsed()) {
      const auto transcript = load_transcript(in_path);
      std::optional<SessionConfig> config;
      if (!config_path.empty()) config = load_session_config(config_path);
      const auto minutes = format_minutes(transcript, config);
      if (out_path.empty()) {
        out << minutes;
      } else {
        write_text(out_path, minutes);
      }
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace focusagent
