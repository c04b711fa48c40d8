#include "dhmc/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "dhmc/errors.hpp"

namespace dhmc {

namespace {

double sample_variance(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

EssInterval interval_of(const std::vector<double>& v) {
  EssInterval iv;
  for (double x : v) iv.mean += x;
  iv.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - iv.mean) * (x - iv.mean);
  iv.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  iv.lo = iv.mean - 1.96 * iv.sd;
  iv.hi = iv.mean + 1.96 * iv.sd;
  return iv;
}

}  // namespace

double batch_means_ess(std::span<const double> x, std::size_t batches) {
  if (batches < 2) throw ContractError("batch means needs at least two batches");
  if (x.size() < 2 * batches) throw ContractError("sequence is shorter than twice the batch count");
  const std::size_t size = x.size() / batches;
  const std::size_t used = size * batches;
  const auto tail = x.subspan(x.size() - used);

  const double var = sample_variance(tail);
  if (!(var > 0.0)) throw UndefinedStatistic("sequence has zero variance");
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t k = 0; k < size; ++k) means[b] += tail[b * size + k];
    means[b] /= static_cast<double>(size);
  }
  const double var_means = sample_variance(means);
  if (!(var_means > 0.0)) throw UndefinedStatistic("batch means have zero variance");
  return static_cast<double>(used) * var / (static_cast<double>(size) * var_means);
}

std::vector<std::string> default_selector(const SampleStore& store) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < store.cols(); ++c) {
    if (store.kind(c) == SampleStore::ColumnKind::value) out.push_back(store.names()[c]);
  }
  return out;
}

EssReport min_ess_report(const SampleStore& store, const std::vector<std::string>& selector,
                         std::size_t total_evals, std::size_t batches) {
  if (store.rows() == 0) throw ContractError("sample store is empty");
  EssReport rep;
  rep.n = store.rows();
  rep.batch_count = batches;
  rep.total_evals = total_evals;
  const auto names = selector.empty() ? default_selector(store) : selector;

  std::vector<double> sq;
  for (const auto& name : names) {
    const auto& col = store.column(name);
    sq.resize(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) sq[i] = col[i] * col[i];
    try {
      rep.params.push_back(ParamEss{name, batch_means_ess(col, batches), batch_means_ess(sq, batches)});
    } catch (const UndefinedStatistic&) {
      rep.excluded.push_back(name);
    }
  }
  if (rep.params.empty()) throw UndefinedStatistic("no column has a defined ESS");
  rep.min_ess = std::numeric_limits<double>::infinity();
  for (const auto& p : rep.params) {
    if (p.min() < rep.min_ess) {
      rep.min_ess = p.min();
      rep.min_param = p.name;
    }
  }
  rep.ess_per_eval = total_evals ? rep.min_ess / static_cast<double>(total_evals) : 0.0;
  return rep;
}

EssSummary summarize(const std::vector<EssReport>& reports) {
  if (reports.size() < 2) throw ContractError("summarizing needs at least two chains");
  const auto& first = reports.front();
  for (const auto& r : reports) {
    if (r.params.size() != first.params.size()) throw ContractError("chain reports have different shapes");
    for (std::size_t k = 0; k < r.params.size(); ++k) {
      if (r.params[k].name != first.params[k].name) throw ContractError("chain reports have different parameters");
    }
  }

  EssSummary s;
  s.chains = reports.size();
  s.min_ess.mean = std::numeric_limits<double>::infinity();
  std::vector<double> a(reports.size()), b(reports.size());
  for (std::size_t k = 0; k < first.params.size(); ++k) {
    for (std::size_t c = 0; c < reports.size(); ++c) {
      a[c] = reports[c].params[k].ess_mean;
      b[c] = reports[c].params[k].ess_second;
    }
    s.names.push_back(first.params[k].name);
    s.mean_moment.push_back(interval_of(a));
    s.second_moment.push_back(interval_of(b));
    for (const auto* iv : {&s.mean_moment.back(), &s.second_moment.back()}) {
      if (iv->mean < s.min_ess.mean) {
        s.min_ess = *iv;
        s.min_param = first.params[k].name;
      }
    }
  }
  for (std::size_t c = 0; c < reports.size(); ++c) a[c] = reports[c].ess_per_eval;
  s.ess_per_eval = interval_of(a);
  return s;
}

}  // namespace dhmc
