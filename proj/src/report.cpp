#include "hvacd/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hvacd/errors.hpp"

namespace hvacd {

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

Matrix stack(const std::vector<DayRecord>& days, Vector DayRecord::*field) {
  Matrix m(kSlotsPerDay, static_cast<Eigen::Index>(days.size()));
  for (std::size_t d = 0; d < days.size(); ++d) m.col(static_cast<Eigen::Index>(d)) = days[d].*field;
  return m;
}

void write_trace(const std::filesystem::path& p, const DisaggregationResult& r) {
  std::ofstream out = open_out(p);
  out << "iteration,objective,penalty_weight\n";
  for (const TracePoint& t : r.objective_trace) {
    out << t.iteration << ',' << fmt(t.objective, "%.9g") << ',' << fmt(t.penalty_weight, "%.9g") << '\n';
  }
}

}  // namespace

std::string method_name(MethodIndex m, PdfMode mode) {
  switch (m) {
    case kAverage:
      return "Average";
    case kIca:
      return "ICA";
    case kFineTuned:
      return std::string("Fine-tuned (") + to_string(mode) + ")";
  }
  return "";
}

void write_customer_days(std::ostream& out, const CustomerRecords& rec) {
  out << "date,slot,raw_total_kw,total_kw,average_hvac_kw,ica_hvac_kw,hvac_hat_kw,base_hat_kw\n";
  for (const DayRecord& d : rec.days) {
    const std::string date = format_date(d.date);
    for (int i = 0; i < kSlotsPerDay; ++i) {
      out << date << ',' << i << ',' << fmt(d.raw_total[i]) << ',' << fmt(d.total[i]) << ','
          << fmt(d.average_hvac[i]) << ',' << fmt(d.ica_hvac[i]) << ',' << fmt(d.hvac_hat[i]) << ','
          << fmt(d.base_hat[i]) << '\n';
    }
  }
}

void write_disaggregation(const std::filesystem::path& dir, const PipelineResult& result, const PipelineConfig& cfg) {
  std::filesystem::create_directories(dir);
  std::ofstream summary = open_out(dir / "summary.csv");
  summary << "customer,date,feasible,max_bound_violation_kwh,iterations,ica_iterations,ica_converged,"
             "weak_linkage,temperature_correlation,alpha,gamma1,gamma2\n";
  for (const CustomerResult& c : result.customers) {
    {
      std::ofstream out = open_out(dir / (c.id + "_labels.csv"));
      write_labels_csv(out, c.labels);
    }
    {
      std::ofstream out = open_out(dir / (c.id + "_liul.csv"));
      out << "date,start_slot,end_slot,magnitude_kw,appliance_hint\n";
      for (const LiulEvent& e : c.liul_events) {
        out << format_date(e.date) << ',' << e.start_index << ',' << e.end_index << ',' << fmt(e.magnitude) << ','
            << e.appliance_hint << '\n';
      }
    }
    CustomerRecords rec{c.id, {}};
    for (const HotDayResult& d : c.days) {
      rec.days.push_back({d.date, d.raw_total, d.total, d.average_hvac, d.ica_hvac, d.result.hvac_hat,
                          d.result.base_hat});
      const FineTuneVars& v = d.result.vars;
      summary << c.id << ',' << format_date(d.date) << ',' << (d.result.feasible ? 1 : 0) << ','
              << fmt(d.result.max_bound_violation, "%.3g") << ',' << d.result.iterations << ',' << d.ica_iterations
              << ',' << (d.ica_converged ? 1 : 0) << ',' << (d.ica.weak_linkage ? 1 : 0) << ','
              << fmt(d.ica.temperature_correlation, "%.6f") << ',' << fmt(v.alpha) << ',' << fmt(v.gamma1) << ','
              << fmt(v.gamma2) << '\n';
      if (cfg.dump_sources && d.model) {
        std::filesystem::create_directories(dir / "sources");
        std::ofstream out = open_out(dir / "sources" / (c.id + "_" + format_date(d.date) + ".csv"));
        write_sources_csv(out, *d.model);
      }
      if (cfg.dump_traces) {
        std::filesystem::create_directories(dir / "traces");
        write_trace(dir / "traces" / (c.id + "_" + format_date(d.date) + ".csv"), d.result);
      }
    }
    std::ofstream out = open_out(dir / (c.id + "_days.csv"));
    write_customer_days(out, rec);
  }
}

CustomerRecords read_customer_days(const std::filesystem::path& dir, const std::string& id) {
  const std::filesystem::path p = dir / (id + "_days.csv");
  std::ifstream in(p);
  if (!in) throw DataError(id + ": missing disaggregation output " + p.string());
  std::string line;
  std::getline(in, line);
  CustomerRecords rec{id, {}};
  std::map<std::string, std::size_t> index;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw DataError(id + ": malformed line " + std::to_string(lineno) + " in " + p.string());
    auto [it, fresh] = index.try_emplace(f[0], rec.days.size());
    if (fresh) {
      DayRecord d;
      d.date = parse_date(f[0]);
      for (Vector* v : {&d.raw_total, &d.total, &d.average_hvac, &d.ica_hvac, &d.hvac_hat, &d.base_hat}) {
        *v = Vector::Zero(kSlotsPerDay);
      }
      rec.days.push_back(std::move(d));
    }
    DayRecord& d = rec.days[it->second];
    const int slot = std::stoi(f[1]);
    if (slot < 0 || slot >= kSlotsPerDay) throw DataError(id + ": bad slot on line " + std::to_string(lineno));
    Vector* cols[] = {&d.raw_total, &d.total, &d.average_hvac, &d.ica_hvac, &d.hvac_hat, &d.base_hat};
    for (int k = 0; k < 6; ++k) (*cols[k])[slot] = std::stod(f[2 + k]);
  }
  return rec;
}

EvaluationResult evaluate_records(const std::vector<CustomerRecords>& records,
                                  const std::vector<DailyLoadMatrix>& truth, const PipelineConfig& cfg) {
  if (records.size() != truth.size()) throw DataError("truth and estimates cover different customers");
  if (records.empty()) throw DataError("nothing to evaluate");
  EvaluationResult out;
  std::vector<std::string> names;
  std::array<std::vector<ScoredSet>, 3> sets;
  std::array<std::vector<Eigen::Vector2d>, 3> energies;
  const FineTuneConfig& ft = cfg.finetune;
  auto energy = [&](const Vector& v) {
    return diurnal_nocturnal_energy(std::span<const double>(v.data(), v.size()), ft.diurnal, ft.nocturnal);
  };

  for (std::size_t c = 0; c < records.size(); ++c) {
    const CustomerRecords& rec = records[c];
    if (rec.days.empty()) throw DataError(rec.id + ": no hot days to evaluate");
    std::vector<Date> dates;
    for (const DayRecord& d : rec.days) {
      if (truth[c].index_of(d.date) < 0) throw DataError(rec.id + ": truth does not cover " + format_date(d.date));
      dates.push_back(d.date);
    }
    const Matrix t = truth[c].select(dates).samples;
    const double rating =
        cfg.evaluation.rating_kw > 0.0 ? cfg.evaluation.rating_kw
                                       : rating_from_truth(truth[c].samples, cfg.evaluation.nameplate_kw);
    names.push_back(rec.id);
    const Matrix est[3] = {stack(rec.days, &DayRecord::average_hvac), stack(rec.days, &DayRecord::ica_hvac),
                           stack(rec.days, &DayRecord::hvac_hat)};
    for (int m = 0; m < 3; ++m) sets[m].push_back({est[m], t, rating});

    for (std::size_t d = 0; d < rec.days.size(); ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      DayScore s{rec.id, rec.days[d].date, {}};
      for (int m = 0; m < 3; ++m) s.nmae[m] = nmae(est[m].col(di), t.col(di), rating);
      out.per_day.push_back(s);
      energies[0].push_back(energy(rec.days[d].raw_total - Vector(t.col(di))));
      energies[1].push_back(energy(rec.days[d].total - rec.days[d].ica_hvac));
      energies[2].push_back(energy(rec.days[d].base_hat));
    }
  }

  for (int m = 0; m < 3; ++m) {
    out.methods[m] = evaluate_method(method_name(static_cast<MethodIndex>(m), ft.pdf_mode), names, sets[m]);
    std::vector<double> frac;
    for (double v : out.methods[m].per_customer_nmae) frac.push_back(v / 100.0);
    out.histograms[m] = nmae_histogram(frac, cfg.evaluation.hist_bin_width, cfg.evaluation.hist_upper);
    if (energies[m].size() >= 3) out.base_distributions[m] = estimate_energy_stats(energies[m]);
  }
  return out;
}

void write_evaluation(const std::filesystem::path& dir, const EvaluationResult& eval, const PipelineConfig& cfg) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out = open_out(dir / "table1.csv");
    out << "method,nmae_pct,nee_pct,std_nmae_pct\n";
    for (const EvalReport& r : eval.methods) {
      out << r.method << ',' << fmt(r.mean_nmae) << ',' << fmt(r.mean_nee) << ',' << fmt(r.std_nmae) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "table2.csv");
    out << "distribution,mu_diurnal_kwh,mu_nocturnal_kwh,sigma_dd,sigma_dn,sigma_nn\n";
    const char* labels[3] = {"actual", "ica", "proposed"};
    for (int m = 0; m < 3; ++m) {
      const BivariateGaussian& g = eval.base_distributions[m];
      out << labels[m] << ',' << fmt(g.mu[0]) << ',' << fmt(g.mu[1]) << ',' << fmt(g.sigma(0, 0)) << ','
          << fmt(g.sigma(0, 1)) << ',' << fmt(g.sigma(1, 1)) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "fig6_hourly.csv");
    out << "method,hour,min_pct,q1_pct,median_pct,q3_pct,max_pct\n";
    for (const EvalReport& r : eval.methods) {
      for (std::size_t h = 0; h < r.hourly.size(); ++h) {
        const QuartileRow& q = r.hourly[h];
        out << r.method << ',' << h << ',' << fmt(q.min) << ',' << fmt(q.q1) << ',' << fmt(q.median) << ','
            << fmt(q.q3) << ',' << fmt(q.max) << '\n';
      }
    }
  }
  {
    std::ofstream out = open_out(dir / "fig8_hist.csv");
    out << "method,bin_lo,bin_hi,count\n";
    for (int m = 0; m < 3; ++m) {
      const Histogram& h = eval.histograms[m];
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        out << eval.methods[m].method << ',' << fmt(h.edges[b], "%.4f") << ',' << fmt(h.edges[b + 1], "%.4f") << ','
            << h.counts[b] << '\n';
      }
      out << eval.methods[m].method << ',' << fmt(h.edges.back(), "%.4f") << ",inf," << h.overflow << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "per_customer.csv");
    out << "method,customer,nmae_pct,nee_pct,rating_kw\n";
    for (const EvalReport& r : eval.methods) {
      for (std::size_t c = 0; c < r.customers.size(); ++c) {
        out << r.method << ',' << r.customers[c] << ',' << fmt(r.per_customer_nmae[c]) << ','
            << fmt(r.per_customer_nee[c]) << ',' << fmt(r.rating_kw[c]) << '\n';
      }
    }
  }
  {
    std::ofstream out = open_out(dir / "per_day.csv");
    out << "customer,date,nmae_average_pct,nmae_ica_pct,nmae_finetuned_pct\n";
    for (const DayScore& s : eval.per_day) {
      out << s.customer << ',' << format_date(s.date) << ',' << fmt(s.nmae[0]) << ',' << fmt(s.nmae[1]) << ','
          << fmt(s.nmae[2]) << '\n';
    }
  }
  if (cfg.evaluation.svg) {
    open_out(dir / "fig6_hourly.svg") << hourly_boxplot_svg(eval.methods[kFineTuned]);
    open_out(dir / "fig8_hist.svg") << histogram_svg(eval.methods, eval.histograms);
  }
}

std::string render_summary(const EvaluationResult& eval) {
  std::ostringstream s;
  s << "| method | nMAE % | nEE % | std nMAE % |\n|---|---|---|---|\n";
  for (const EvalReport& r : eval.methods) {
    s << "| " << r.method << " | " << fmt(r.mean_nmae, "%.2f") << " | " << fmt(r.mean_nee, "%.2f") << " | "
      << fmt(r.std_nmae, "%.2f") << " |\n";
  }
  int improved = 0;
  for (const DayScore& d : eval.per_day) improved += d.nmae[kFineTuned] < d.nmae[kIca] ? 1 : 0;
  s << "\nFine-tuning improved on raw ICA on " << improved << " of " << eval.per_day.size() << " hot days.\n";
  s << "\n| base distribution | mu_di | mu_noc | s_dd | s_dn | s_nn |\n|---|---|---|---|---|---|\n";
  const char* labels[3] = {"actual", "ica", "proposed"};
  for (int m = 0; m < 3; ++m) {
    const BivariateGaussian& g = eval.base_distributions[m];
    s << "| " << labels[m] << " | " << fmt(g.mu[0], "%.3f") << " | " << fmt(g.mu[1], "%.3f") << " | "
      << fmt(g.sigma(0, 0), "%.3f") << " | " << fmt(g.sigma(0, 1), "%.3f") << " | " << fmt(g.sigma(1, 1), "%.3f")
      << " |\n";
  }
  return s.str();
}

std::string hourly_boxplot_svg(const EvalReport& r) {
  const double w = 720, h = 360, left = 50, bottom = 30, top = 20;
  double ymax = 0.0;
  for (const QuartileRow& q : r.hourly) ymax = std::max(ymax, q.max);
  if (ymax <= 0.0) ymax = 1.0;
  const double plot_h = h - top - bottom;
  const double slot_w = (w - left - 10) / kHoursPerDay;
  auto y = [&](double v) { return top + plot_h * (1.0 - v / ymax); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "<text x=\"" << left << "\" y=\"14\" font-size=\"12\">Hourly nMAE (%), " << r.method << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << w - 10 << "\" y2=\"" << y(0)
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"4\" y=\"" << y(ymax) + 4 << "\" font-size=\"10\">" << fmt(ymax, "%.1f") << "</text>\n";
  for (std::size_t hr = 0; hr < r.hourly.size(); ++hr) {
    const QuartileRow& q = r.hourly[hr];
    const double cx = left + (hr + 0.5) * slot_w;
    const double bw = slot_w * 0.6;
    s << "<line x1=\"" << fmt(cx, "%.1f") << "\" y1=\"" << fmt(y(q.min), "%.1f") << "\" x2=\"" << fmt(cx, "%.1f")
      << "\" y2=\"" << fmt(y(q.max), "%.1f") << "\" stroke=\"gray\"/>\n";
    s << "<rect x=\"" << fmt(cx - bw / 2, "%.1f") << "\" y=\"" << fmt(y(q.q3), "%.1f") << "\" width=\""
      << fmt(bw, "%.1f") << "\" height=\"" << fmt(std::max(0.5, y(q.q1) - y(q.q3)), "%.1f")
      << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << fmt(cx - bw / 2, "%.1f") << "\" y1=\"" << fmt(y(q.median), "%.1f") << "\" x2=\""
      << fmt(cx + bw / 2, "%.1f") << "\" y2=\"" << fmt(y(q.median), "%.1f") << "\" stroke=\"red\"/>\n";
    if (hr % 3 == 0) {
      s << "<text x=\"" << fmt(cx - 4, "%.1f") << "\" y=\"" << h - 10 << "\" font-size=\"10\">" << hr << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

std::string histogram_svg(const std::array<EvalReport, 3>& methods, const std::array<Histogram, 3>& hists) {
  const double w = 720, h = 360, left = 40, bottom = 30, top = 40;
  const char* colors[3] = {"#bdbdbd", "#fdae6b", "#6baed6"};
  const std::size_t bins = hists[0].counts.size() + 1;  // last bar is the overflow bin
  int cmax = 1;
  for (const Histogram& hi : hists) {
    for (int c : hi.counts) cmax = std::max(cmax, c);
    cmax = std::max(cmax, hi.overflow);
  }
  const double plot_h = h - top - bottom;
  const double group_w = (w - left - 10) / static_cast<double>(bins);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  for (int m = 0; m < 3; ++m) {
    s << "<rect x=\"" << left + m * 200 << "\" y=\"8\" width=\"10\" height=\"10\" fill=\"" << colors[m] << "\"/>";
    s << "<text x=\"" << left + m * 200 + 14 << "\" y=\"17\" font-size=\"11\">" << methods[m].method << "</text>\n";
  }
  for (std::size_t b = 0; b < bins; ++b) {
    for (int m = 0; m < 3; ++m) {
      const Histogram& hi = hists[m];
      const int count = b + 1 < bins ? hi.counts[b] : hi.overflow;
      const double bh = plot_h * count / cmax;
      const double x = left + b * group_w + m * group_w / 3.2;
      s << "<rect x=\"" << fmt(x, "%.1f") << "\" y=\"" << fmt(top + plot_h - bh, "%.1f") << "\" width=\""
        << fmt(group_w / 3.4, "%.1f") << "\" height=\"" << fmt(bh, "%.1f") << "\" fill=\"" << colors[m]
        << "\"/>\n";
    }
    const std::string label = b + 1 < bins ? fmt(hists[0].edges[b], "%.2f") : ">" + fmt(hists[0].edges.back(), "%.2f");
    s << "<text x=\"" << fmt(left + b * group_w, "%.1f") << "\" y=\"" << h - 10 << "\" font-size=\"10\">" << label
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace hvacd
