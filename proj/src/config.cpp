#include "hvacd/config.hpp"

#include <fstream>
#include <sstream>

#include "hvacd/errors.hpp"
#include "json.hpp"

namespace hvacd {

using nlohmann::json;

namespace {

// Reads the keys of `j` into fields via `fields(key, value)`; rejects keys
// the callback does not know.
template <class F>
void read_object(const json& j, const std::string& where, F&& fields) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!fields(it.key(), it.value())) throw ConfigError("unknown config key '" + where + "." + it.key() + "'");
  }
}

template <class T>
T get(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

json window_json(SlotWindow w) { return json::array({w.begin, w.end}); }

SlotWindow window_from(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(key + " must be [begin, end)");
  return {get<int>(v[0], key), get<int>(v[1], key)};
}

PdfMode pdf_mode_from(const std::string& s) {
  if (s == "off") return PdfMode::Off;
  if (s == "single_user") return PdfMode::SingleUser;
  if (s == "multi_user") return PdfMode::MultiUser;
  throw ConfigError("finetune.pdf_mode must be off, single_user or multi_user");
}

KlSign kl_sign_from(const std::string& s) {
  if (s == "penalize") return KlSign::Penalize;
  if (s == "paper_literal") return KlSign::PaperLiteral;
  throw ConfigError("finetune.kl_sign must be penalize or paper_literal");
}

}  // namespace

const char* to_string(PdfMode m) {
  switch (m) {
    case PdfMode::Off:
      return "off";
    case PdfMode::SingleUser:
      return "single_user";
    case PdfMode::MultiUser:
      return "multi_user";
  }
  return "off";
}

const char* to_string(KlSign s) { return s == KlSign::Penalize ? "penalize" : "paper_literal"; }

void PipelineConfig::validate() const {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (synth.households < 1) throw ConfigError("synth.households must be >= 1");
  if (synth.hot_days < 0 || synth.mild_days < 0 || synth.shoulder_days < 0 ||
      synth.hot_days + synth.mild_days + synth.shoulder_days < 1) {
    throw ConfigError("synth must request at least one day");
  }
  if (!(ingestion.max_missing_fraction >= 0.0 && ingestion.max_missing_fraction <= 1.0)) {
    throw ConfigError("ingestion.max_missing_fraction must lie in [0, 1]");
  }
  if (!(classify.mild_lo_c <= classify.mild_hi_c) || !(classify.max_ks >= 0.0 && classify.max_ks <= 1.0) ||
      classify.min_mild_days < 3) {
    throw ConfigError("invalid classify parameters");
  }
  if (!(liul.min_jump_kw > 0.0) || liul.max_duration_slots < 1 || !(liul.fall_ratio > 0.0) ||
      liul.rarity_window_slots < 0) {
    throw ConfigError("invalid liul parameters");
  }
  if (k_use < 3) throw ConfigError("k_use must be >= 3");
  if (ica.max_iters < 0 || !(ica.tol > 0.0)) throw ConfigError("invalid ica options");
  finetune.validate();
  if (evaluation.rating_kw < 0.0 || !(evaluation.nameplate_kw > 0.0) || !(evaluation.hist_bin_width > 0.0) ||
      !(evaluation.hist_upper > 0.0)) {
    throw ConfigError("invalid evaluation options");
  }
  for (const CustomerPaths& c : customers) {
    if (c.id.empty() || c.power.empty() || c.temperature.empty()) {
      throw ConfigError("each customer needs id, power and temperature paths");
    }
  }
}

std::filesystem::path PipelineConfig::corpus_path() const {
  return corpus_dir.empty() ? std::filesystem::path(output_dir) / "corpus" : std::filesystem::path(corpus_dir);
}

PipelineConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  read_object(root, "config", [&](const std::string& key, const json& v) {
    if (key == "seed") c.seed = get<std::uint64_t>(v, key);
    else if (key == "output_dir") c.output_dir = get<std::string>(v, key);
    else if (key == "workers") c.workers = get<int>(v, key);
    else if (key == "corpus_dir") c.corpus_dir = get<std::string>(v, key);
    else if (key == "k_use") c.k_use = get<int>(v, key);
    else if (key == "dump_sources") c.dump_sources = get<bool>(v, key);
    else if (key == "dump_traces") c.dump_traces = get<bool>(v, key);
    else if (key == "synth") {
      read_object(v, key, [&](const std::string& k, const json& x) {
        if (k == "households") c.synth.households = get<int>(x, k);
        else if (k == "hot_days") c.synth.hot_days = get<int>(x, k);
        else if (k == "mild_days") c.synth.mild_days = get<int>(x, k);
        else if (k == "shoulder_days") c.synth.shoulder_days = get<int>(x, k);
        else if (k == "start_date") c.synth.start_date = parse_date(get<std::string>(x, k));
        else return false;
        return true;
      });
    } else if (key == "customers") {
      if (!v.is_array()) throw ConfigError("customers must be an array");
      for (const json& item : v) {
        CustomerPaths p;
        read_object(item, "customers[]", [&](const std::string& k, const json& x) {
          if (k == "id") p.id = get<std::string>(x, k);
          else if (k == "power") p.power = get<std::string>(x, k);
          else if (k == "temperature") p.temperature = get<std::string>(x, k);
          else if (k == "truth") p.truth = get<std::string>(x, k);
          else return false;
          return true;
        });
        c.customers.push_back(std::move(p));
      }
    } else if (key == "ingestion") {
      read_object(v, key, [&](const std::string& k, const json& x) {
        if (k == "max_missing_fraction") c.ingestion.max_missing_fraction = get<double>(x, k);
        else if (k == "duplicates") {
          const auto s = get<std::string>(x, k);
          if (s == "reject") c.ingestion.duplicates = DuplicatePolicy::Reject;
          else if (s == "keep_first") c.ingestion.duplicates = DuplicatePolicy::KeepFirst;
          else throw ConfigError("ingestion.duplicates must be reject or keep_first");
        } else return false;
        return true;
      });
    } else if (key == "classify") {
      read_object(v, key, [&](const std::string& k, const json& x) {
        if (k == "hot_max_c") c.classify.hot_max_c = get<double>(x, k);
        else if (k == "mild_lo_c") c.classify.mild_lo_c = get<double>(x, k);
        else if (k == "mild_hi_c") c.classify.mild_hi_c = get<double>(x, k);
        else if (k == "max_ks") c.classify.max_ks = get<double>(x, k);
        else if (k == "min_mild_days") c.classify.min_mild_days = get<int>(x, k);
        else return false;
        return true;
      });
    } else if (key == "liul") {
      read_object(v, key, [&](const std::string& k, const json& x) {
        if (k == "min_jump_kw") c.liul.min_jump_kw = get<double>(x, k);
        else if (k == "max_duration_slots") c.liul.max_duration_slots = get<int>(x, k);
        else if (k == "fall_ratio") c.liul.fall_ratio = get<double>(x, k);
        else if (k == "max_slot_frequency") c.liul.max_slot_frequency = get<double>(x, k);
        else if (k == "rarity_window_slots") c.liul.rarity_window_slots = get<int>(x, k);
        else return false;
        return true;
      });
    } else if (key == "ica") {
      read_object(v, key, [&](const std::string& k, const json& x) {
        if (k == "tol") c.ica.tol = get<double>(x, k);
        else if (k == "max_iters") c.ica.max_iters = get<int>(x, k);
        else if (k == "seed") c.ica.seed = get<std::uint64_t>(x, k);
        else return false;
        return true;
      });
    } else if (key == "finetune") {
      read_object(v, key, [&](const std::string& k, const json& x) {
        FineTuneConfig& f = c.finetune;
        if (k == "lambda1") f.lambda1 = get<double>(x, k);
        else if (k == "lambda2") f.lambda2 = get<double>(x, k);
        else if (k == "lambda3") f.lambda3 = get<double>(x, k);
        else if (k == "epsilon_kwh") f.epsilon_kwh = get<double>(x, k);
        else if (k == "pdf_mode") f.pdf_mode = pdf_mode_from(get<std::string>(x, k));
        else if (k == "kl_sign") f.kl_sign = kl_sign_from(get<std::string>(x, k));
        else if (k == "diurnal_window") f.diurnal = window_from(x, k);
        else if (k == "nocturnal_window") f.nocturnal = window_from(x, k);
        else if (k == "outer_passes") f.outer_passes = get<int>(x, k);
        else if (k == "solver") {
          read_object(x, "finetune.solver", [&](const std::string& s, const json& y) {
            if (s == "max_iters") f.solver.max_iters = get<int>(y, s);
            else if (s == "step") f.solver.step = get<double>(y, s);
            else if (s == "tol") f.solver.tol = get<double>(y, s);
            else if (s == "penalty_initial") f.solver.penalty_initial = get<double>(y, s);
            else if (s == "penalty_double_every") f.solver.penalty_double_every = get<int>(y, s);
            else return false;
            return true;
          });
        } else return false;
        return true;
      });
    } else if (key == "evaluation") {
      read_object(v, key, [&](const std::string& k, const json& x) {
        if (k == "rating_kw") c.evaluation.rating_kw = get<double>(x, k);
        else if (k == "nameplate_kw") c.evaluation.nameplate_kw = get<double>(x, k);
        else if (k == "svg") c.evaluation.svg = get<bool>(x, k);
        else if (k == "hist_bin_width") c.evaluation.hist_bin_width = get<double>(x, k);
        else if (k == "hist_upper") c.evaluation.hist_upper = get<double>(x, k);
        else return false;
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  c.synth.seed = c.seed;
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const PipelineConfig& c) {
  json customers = json::array();
  for (const CustomerPaths& p : c.customers) {
    customers.push_back({{"id", p.id}, {"power", p.power}, {"temperature", p.temperature}, {"truth", p.truth}});
  }
  const FineTuneConfig& f = c.finetune;
  json j = {
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"workers", c.workers},
      {"corpus_dir", c.corpus_dir},
      {"k_use", c.k_use},
      {"dump_sources", c.dump_sources},
      {"dump_traces", c.dump_traces},
      {"synth",
       {{"households", c.synth.households},
        {"hot_days", c.synth.hot_days},
        {"mild_days", c.synth.mild_days},
        {"shoulder_days", c.synth.shoulder_days},
        {"start_date", format_date(c.synth.start_date)}}},
      {"customers", customers},
      {"ingestion",
       {{"max_missing_fraction", c.ingestion.max_missing_fraction},
        {"duplicates", c.ingestion.duplicates == DuplicatePolicy::Reject ? "reject" : "keep_first"}}},
      {"classify",
       {{"hot_max_c", c.classify.hot_max_c},
        {"mild_lo_c", c.classify.mild_lo_c},
        {"mild_hi_c", c.classify.mild_hi_c},
        {"max_ks", c.classify.max_ks},
        {"min_mild_days", c.classify.min_mild_days}}},
      {"liul",
       {{"min_jump_kw", c.liul.min_jump_kw},
        {"max_duration_slots", c.liul.max_duration_slots},
        {"fall_ratio", c.liul.fall_ratio},
        {"max_slot_frequency", c.liul.max_slot_frequency},
        {"rarity_window_slots", c.liul.rarity_window_slots}}},
      {"ica", {{"tol", c.ica.tol}, {"max_iters", c.ica.max_iters}, {"seed", c.ica.seed}}},
      {"finetune",
       {{"lambda1", f.lambda1},
        {"lambda2", f.lambda2},
        {"lambda3", f.lambda3},
        {"epsilon_kwh", f.epsilon_kwh},
        {"pdf_mode", to_string(f.pdf_mode)},
        {"kl_sign", to_string(f.kl_sign)},
        {"diurnal_window", window_json(f.diurnal)},
        {"nocturnal_window", window_json(f.nocturnal)},
        {"outer_passes", f.outer_passes},
        {"solver",
         {{"max_iters", f.solver.max_iters},
          {"step", f.solver.step},
          {"tol", f.solver.tol},
          {"penalty_initial", f.solver.penalty_initial},
          {"penalty_double_every", f.solver.penalty_double_every}}}}},
      {"evaluation",
       {{"rating_kw", c.evaluation.rating_kw},
        {"nameplate_kw", c.evaluation.nameplate_kw},
        {"svg", c.evaluation.svg},
        {"hist_bin_width", c.evaluation.hist_bin_width},
        {"hist_upper", c.evaluation.hist_upper}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace hvacd
