#include "sbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>

#include "sbp/errors.hpp"

namespace sbp {

namespace {

void require_rate(double r, const char* what) {
  if (!std::isfinite(r) || r < 0.0) {
    throw StructureError(std::string(what) + " must be finite and nonnegative, got " +
                         std::to_string(r));
  }
}

}  // namespace

RateRow::RateRow(double up, std::vector<DownRate> down) : up_(up) {
  if (!std::isfinite(up) || up <= 0.0) {
    throw StructureError("birth rate must be finite and positive, got " + std::to_string(up));
  }
  std::sort(down.begin(), down.end(), [](const DownRate& a, const DownRate& b) { return a.to < b.to; });
  for (std::size_t k = 0; k < down.size(); ++k) {
    require_rate(down[k].rate, "down rate");
    if (k > 0 && down[k].to == down[k - 1].to) {
      throw StructureError("repeated down target " + std::to_string(down[k].to));
    }
    if (down[k].rate > 0.0) {
      down_.push_back(down[k]);
      down_total_ += down[k].rate;
    }
  }
}

RateRow::RateRow(double up, const std::map<std::size_t, double>& down)
    : RateRow(up, [&] {
        std::vector<DownRate> v;
        v.reserve(down.size());
        for (const auto& [to, rate] : down) v.push_back({to, rate});
        return v;
      }()) {}

double RateRow::rate_to(std::size_t j) const {
  auto it = std::lower_bound(down_.begin(), down_.end(), j,
                             [](const DownRate& d, std::size_t t) { return d.to < t; });
  return (it != down_.end() && it->to == j) ? it->rate : 0.0;
}

std::optional<std::size_t> RateRow::max_target() const {
  if (down_.empty()) return std::nullopt;
  return down_.back().to;
}

std::optional<std::size_t> RateRow::min_target() const {
  if (down_.empty()) return std::nullopt;
  return down_.front().to;
}

struct SingleBirthModel::Impl {
  std::string description;
  bool tabulated = false;
  std::optional<std::size_t> horizon;
  RowFunction generator;

  mutable std::mutex mutex;
  // deque keeps references stable while later rows are appended.
  mutable std::deque<RateRow> rows;

  static void check_row(std::size_t i, const RateRow& row) {
    if (auto top = row.max_target(); top && *top >= i) {
      const std::string what = *top == i      ? "diagonal entry"
                               : *top == i + 1 ? "entry at i+1 outside the birth rate"
                                               : "skip-up entry";
      throw StructureError("row " + std::to_string(i) + " has a " + what + " at j = " +
                           std::to_string(*top));
    }
  }
};

SingleBirthModel SingleBirthModel::tabulated(std::vector<RateRow> rows, std::string description) {
  if (rows.empty()) throw StructureError("a tabulated model needs at least one row");
  auto impl = std::make_shared<Impl>();
  impl->description = std::move(description);
  impl->tabulated = true;
  impl->horizon = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Impl::check_row(i, rows[i]);
    impl->rows.push_back(std::move(rows[i]));
  }
  return SingleBirthModel(std::move(impl));
}

SingleBirthModel SingleBirthModel::generated(RowFunction rows, std::optional<std::size_t> declared_horizon,
                                             std::string description) {
  if (!rows) throw StructureError("generated model needs a row function");
  if (declared_horizon && *declared_horizon == 0) throw StructureError("horizon must be positive");
  auto impl = std::make_shared<Impl>();
  impl->description = std::move(description);
  impl->horizon = declared_horizon;
  impl->generator = std::move(rows);
  return SingleBirthModel(std::move(impl));
}

const RateRow& SingleBirthModel::row(std::size_t i) const {
  const Impl& m = *impl_;
  if (m.horizon && i >= *m.horizon) {
    throw HorizonExceeded("row " + std::to_string(i) + " requested but the model has " +
                          std::to_string(*m.horizon) + " rows");
  }
  if (m.tabulated) return m.rows[i];
  std::lock_guard lock(m.mutex);
  while (m.rows.size() <= i) {
    const std::size_t next = m.rows.size();
    RateRow r = m.generator(next);
    Impl::check_row(next, r);
    m.rows.push_back(std::move(r));
  }
  return m.rows[i];
}

double SingleBirthModel::rate(std::size_t i, std::size_t j) const {
  const RateRow& r = row(i);
  if (j == i + 1) return r.up();
  if (j == i) return -r.total();
  if (j > i) return 0.0;
  return r.rate_to(j);
}

std::optional<std::size_t> SingleBirthModel::horizon() const { return impl_->horizon; }
bool SingleBirthModel::is_tabulated() const { return impl_->tabulated; }
const std::string& SingleBirthModel::description() const { return impl_->description; }

void SingleBirthModel::require_rows_through(std::size_t last) const {
  if (impl_->horizon && last >= *impl_->horizon) {
    throw HorizonExceeded("rows 0.." + std::to_string(last) + " needed but the model has " +
                          std::to_string(*impl_->horizon) + " rows");
  }
}

SingleBirthModel SingleBirthModel::tabulate(std::size_t count) const {
  require_rows_through(count == 0 ? 0 : count - 1);
  std::vector<RateRow> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) rows.push_back(row(i));
  return tabulated(std::move(rows), impl_->description);
}

IrreducibilityReport SingleBirthModel::check_irreducibility(std::size_t rows) const {
  IrreducibilityReport report;
  if (impl_->horizon) rows = std::min(rows, *impl_->horizon);
  report.checked_rows = rows;
  if (rows <= 1) return report;
  // From state i every state in [i, rows) is reachable by births, so the
  // lowest reachable state is the fixed point of x -> min down target over [x, rows).
  std::vector<std::size_t> suffix_min(rows + 1, rows);
  for (std::size_t k = rows; k-- > 0;) {
    const std::size_t own = row(k).min_target().value_or(k);
    suffix_min[k] = std::min(own, suffix_min[k + 1]);
  }
  std::vector<std::size_t> lowest(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t x = i;
    while (suffix_min[x] < x) x = suffix_min[x];
    lowest[i] = x;
  }
  for (std::size_t i = 1; i < rows; ++i) {
    if (lowest[i] != 0) {
      report.irreducible_on_horizon = false;
      report.first_stuck_state = i;
      report.note = "state " + std::to_string(i) + " cannot return below state " +
                    std::to_string(lowest[i]) + " within the first " + std::to_string(rows) +
                    " rows";
      break;
    }
  }
  return report;
}

SingleBirthModel model_uniform_catastrophe(double a, double b, double q01) {
  if (!(a > 0.0) || !(b > 0.0) || !(q01 > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
      !std::isfinite(q01)) {
    throw DomainError("uniform catastrophe model needs a, b, q01 > 0");
  }
  auto rows = [a, b, q01](std::size_t i) {
    if (i == 0) return RateRow(q01, std::vector<DownRate>{});
    std::vector<DownRate> down(i);
    for (std::size_t j = 0; j < i; ++j) down[j] = {j, a};
    return RateRow(b * static_cast<double>(i), std::move(down));
  };
  return SingleBirthModel::generated(rows, std::nullopt,
                                     "uniform_catastrophe(a=" + std::to_string(a) +
                                         ", b=" + std::to_string(b) + ", q01=" + std::to_string(q01) + ")");
}

SingleBirthModel model_constant_column(RateFunction q_i0, RateFunction up, std::string description) {
  if (!q_i0 || !up) throw DomainError("constant column model needs both rate functions");
  auto rows = [q_i0 = std::move(q_i0), up = std::move(up)](std::size_t i) {
    const double u = up(i);
    if (!(u > 0.0) || !std::isfinite(u)) {
      throw DomainError("birth rate must be positive at i = " + std::to_string(i));
    }
    if (i == 0) return RateRow(u, std::vector<DownRate>{});
    const double c = q_i0(i);
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw DomainError("q_i0 must be positive at i = " + std::to_string(i));
    }
    return RateRow(u, std::vector<DownRate>{{0, c}});
  };
  return SingleBirthModel::generated(rows, std::nullopt, std::move(description));
}

SingleBirthModel model_birth_death(RateFunction up, RateFunction down, std::string description) {
  if (!up || !down) throw DomainError("birth-death model needs both rate functions");
  auto rows = [up = std::move(up), down = std::move(down)](std::size_t i) {
    const double u = up(i);
    if (!(u > 0.0) || !std::isfinite(u)) {
      throw DomainError("birth rate must be positive at i = " + std::to_string(i));
    }
    if (i == 0) return RateRow(u, std::vector<DownRate>{});
    const double d = down(i);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw DomainError("death rate must be positive at i = " + std::to_string(i));
    }
    return RateRow(u, std::vector<DownRate>{{i - 1, d}});
  };
  return SingleBirthModel::generated(rows, std::nullopt, std::move(description));
}

SingleDeathModel::SingleDeathModel(std::vector<Row> rows, std::vector<double> c)
    : rows_(std::move(rows)), c_(std::move(c)) {
  if (rows_.empty()) throw StructureError("single death model needs at least one row");
  if (c_.size() != rows_.size()) throw StructureError("killing vector length must match the row count");
  const std::size_t n = rows_.size() - 1;
  for (std::size_t i = 0; i <= n; ++i) {
    if (i > 0 && (!(rows_[i].down > 0.0) || !std::isfinite(rows_[i].down))) {
      throw StructureError("death rate q_{i,i-1} must be positive at i = " + std::to_string(i));
    }
    for (const auto& [j, r] : rows_[i].up) {
      if (j <= i || j > n) {
        throw StructureError("row " + std::to_string(i) + " has an upward entry outside (i, N]");
      }
      require_rate(r, "up rate");
    }
    if (!std::isfinite(c_[i])) throw StructureError("killing rate must be finite");
  }
}

double SingleDeathModel::rate(std::size_t i, std::size_t j) const {
  const Row& r = rows_.at(i);
  if (i > 0 && j == i - 1) return r.down;
  if (j > i) {
    auto it = r.up.find(j);
    return it == r.up.end() ? 0.0 : it->second;
  }
  if (j == i) {
    double total = i > 0 ? r.down : 0.0;
    for (const auto& [k, v] : r.up) total += v;
    return -total;
  }
  return 0.0;
}

}  // namespace sbp
