#include "rcor/mvstat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rcor/error.hpp"
#include "rcor/rng.hpp"
#include "rcor/unistat.hpp"

namespace rcor {

namespace {

void validate_config(const BorelConfig& config) {
  if (config.integer_bits < 0 || config.integer_bits > 62) {
    throw std::invalid_argument("BorelConfig: integer_bits must be in [0, 62]");
  }
  if (config.fractional_bits < 1 || config.fractional_bits > 1024) {
    throw std::invalid_argument("BorelConfig: fractional_bits must be in [1, 1024]");
  }
}

std::int64_t digit_count(std::size_t d, const BorelConfig& config) {
  return 1 + static_cast<std::int64_t>(d) *
                 (1 + config.integer_bits + config.fractional_bits);
}

// Streams the digit string of one row, most significant digit first.
template <typename Emit>
void digit_walk(std::span<const double> row, const BorelConfig& config,
                Emit&& emit) {
  validate_config(config);
  const std::size_t d = row.size();
  if (d == 0) throw std::invalid_argument("borel_digits: empty row");

  std::vector<std::uint64_t> ipart(d);
  std::vector<double> frac(d);
  // Negative coordinates emit complemented magnitude digits so the code is
  // strictly increasing in the coordinate value over the whole real line.
  std::vector<int> comp(d);
  const double cap = std::ldexp(1.0, config.integer_bits);
  for (std::size_t j = 0; j < d; ++j) {
    if (!std::isfinite(row[j])) {
      throw std::invalid_argument("borel_digits: non-finite value");
    }
    const double a = std::abs(row[j]);
    const double fl = std::floor(a);
    if (fl >= cap) {
      throw std::invalid_argument(
          "borel_digits: integer part does not fit in integer_bits");
    }
    ipart[j] = static_cast<std::uint64_t>(fl);
    frac[j] = a - fl;
    comp[j] = row[j] >= 0.0 ? 0 : 1;
  }

  emit(1);
  for (std::size_t j = 0; j < d; ++j) emit(1 - comp[j]);
  for (int t = config.integer_bits - 1; t >= 0; --t) {
    for (std::size_t j = 0; j < d; ++j) {
      emit(static_cast<int>((ipart[j] >> t) & 1u) ^ comp[j]);
    }
  }
  for (int t = 0; t < config.fractional_bits; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      frac[j] += frac[j];
      int bit = 0;
      if (frac[j] >= 1.0) {
        frac[j] -= 1.0;
        bit = 1;
      }
      emit(bit ^ comp[j]);
    }
  }
}

}  // namespace

std::strong_ordering operator<=>(const BorelCode& a, const BorelCode& b) {
  if (a.bits_ != b.bits_) {
    throw std::invalid_argument("BorelCode: comparing codes of different widths");
  }
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    if (a.words_[i] != b.words_[i]) return a.words_[i] <=> b.words_[i];
  }
  return std::strong_ordering::equal;
}

bool operator==(const BorelCode& a, const BorelCode& b) {
  return a.bits_ == b.bits_ && a.words_ == b.words_;
}

BorelCode borel_digits(std::span<const double> row, const BorelConfig& config) {
  const std::int64_t total = digit_count(row.size(), config);
  std::vector<std::uint64_t> words(
      (static_cast<std::size_t>(total) + 63) / 64, 0);
  std::size_t pos = 0;
  digit_walk(row, config, [&](int bit) {
    if (bit) words[pos >> 6] |= std::uint64_t{1} << (63 - (pos & 63));
    ++pos;
  });
  return BorelCode(std::move(words), total);
}

double borel_merge(std::span<const double> row, const BorelConfig& config) {
  const std::int64_t point =
      1 + static_cast<std::int64_t>(row.size()) * (1 + config.integer_bits);
  double value = 0.0;
  double scale = 1.0;
  std::int64_t pos = 0;
  digit_walk(row, config, [&](int bit) {
    if (pos < point) {
      value = value * 2.0 + bit;
    } else {
      scale *= 0.5;
      value += bit * scale;
    }
    ++pos;
  });
  return value;
}

std::vector<BorelCode> borel_code_rows(const Matrix& m, const BorelConfig& config) {
  std::vector<BorelCode> codes;
  codes.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    codes.push_back(borel_digits(m.row(r), config));
  }
  return codes;
}

std::vector<std::int64_t> rank_codes(const std::vector<BorelCode>& codes,
                                     std::uint64_t tie_seed) {
  const std::size_t n = codes.size();
  if (n == 0) throw std::invalid_argument("rank_codes: empty input");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (codes[a] != codes[b]) return codes[a] < codes[b];
    return a < b;
  });

  bool has_ties = false;
  for (std::size_t k = 1; k < n; ++k) {
    if (codes[order[k - 1]] == codes[order[k]]) {
      has_ties = true;
      break;
    }
  }
  if (has_ties) {
    std::vector<std::uint64_t> priority(n);
    Rng rng(tie_seed);
    for (auto& p : priority) p = rng.next_u64();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (codes[a] != codes[b]) return codes[a] < codes[b];
      if (priority[a] != priority[b]) return priority[a] < priority[b];
      return a < b;
    });
  }

  std::vector<std::int64_t> ranks(n);
  for (std::size_t k = 0; k < n; ++k) {
    ranks[order[k]] = static_cast<std::int64_t>(k) + 1;
  }
  return ranks;
}

double grothe_tau(const MultiRankProfile& profile) {
  const std::size_t n = profile.rx.size();
  if (n < 2) throw std::invalid_argument("grothe_tau: need n >= 2");
  const double m = static_cast<double>(n) * (static_cast<double>(n) - 1.0);
  const double a = static_cast<double>(profile.rx_total) / m;
  const double b = static_cast<double>(profile.ry_total) / m;
  const double c = static_cast<double>(profile.rxy_total) / m;
  const double var = (a * (1.0 - a)) * (b * (1.0 - b));
  if (!(var > 0.0)) {
    throw degenerate_error("grothe_tau: dominance counts have zero variance");
  }
  return (c - a * b) / std::sqrt(var);
}

double grothe_tau(const MultiSample& sample, bool self_inclusion) {
  return grothe_tau(multivariate_ranks(sample, self_inclusion));
}

double grothe_spearman(const MultiRankProfile& profile) {
  const std::size_t rows = profile.rx.size();
  if (rows < 3) throw std::invalid_argument("grothe_spearman: need n >= 3");
  const double n = static_cast<double>(rows);
  const double c1 = 1.0 / (n * (n - 1.0) * (n - 2.0));
  const double c2 = 1.0 / (n * n * (n - 1.0) * (n - 1.0));

  std::int64_t sum_xy = 0;
  std::int64_t sum_xx = 0;
  std::int64_t sum_yy = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    sum_xy += profile.rx[i] * profile.ry[i];
    sum_xx += profile.rx[i] * (profile.rx[i] - 1);
    sum_yy += profile.ry[i] * (profile.ry[i] - 1);
  }
  const double rx = static_cast<double>(profile.rx_total);
  const double ry = static_cast<double>(profile.ry_total);
  const double sxy =
      c1 * static_cast<double>(sum_xy - profile.rxy_total) - c2 * (rx * ry);
  const double sx = c1 * static_cast<double>(sum_xx) - c2 * rx * rx;
  const double sy = c1 * static_cast<double>(sum_yy) - c2 * ry * ry;
  if (!(sx > 0.0) || !(sy > 0.0)) {
    throw degenerate_error("grothe_spearman: dominance counts have zero variance");
  }
  return sxy / std::sqrt(sx * sy);
}

double grothe_spearman(const MultiSample& sample, bool self_inclusion) {
  return grothe_spearman(multivariate_ranks(sample, self_inclusion));
}

namespace {

struct CodeRanks {
  std::vector<std::int64_t> xr;
  std::vector<std::int64_t> yr;
  std::vector<std::size_t> xorder;  // xorder[k] = row with x-rank k+1
  std::vector<std::size_t> yorder;
};

CodeRanks make_code_ranks(const MultiSample& sample, const BorelConfig& config,
                          std::uint64_t tie_seed) {
  CodeRanks cr;
  cr.xr = rank_codes(borel_code_rows(sample.x(), config), derive_seed(tie_seed, 1));
  cr.yr = rank_codes(borel_code_rows(sample.y(), config), derive_seed(tie_seed, 2));
  const std::size_t n = cr.xr.size();
  cr.xorder.resize(n);
  cr.yorder.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cr.xorder[static_cast<std::size_t>(cr.xr[i] - 1)] = i;
    cr.yorder[static_cast<std::size_t>(cr.yr[i] - 1)] = i;
  }
  return cr;
}

// Merged y-ranks along increasing merged x, with y-row perm[i] paired to
// x-row i.
std::vector<std::int64_t> concomitant_xy(const CodeRanks& cr,
                                         std::span<const std::size_t> perm) {
  const std::size_t n = cr.xr.size();
  std::vector<std::int64_t> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = cr.yr[perm[cr.xorder[k]]];
  return out;
}

std::vector<std::int64_t> concomitant_yx(const CodeRanks& cr,
                                         std::span<const std::size_t> perm) {
  const std::size_t n = cr.xr.size();
  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[perm[i]] = i;
  std::vector<std::int64_t> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = cr.xr[inverse[cr.yorder[k]]];
  return out;
}

bool row_le(const Matrix& m, std::size_t j, std::size_t i) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (m(j, c) > m(i, c)) return false;
  }
  return true;
}

// Fixed per-sample state for dominance-count statistics under relabelings of
// the y block. rx and the multiset of ry values never change; only the joint
// counts need an O(n^2) pass per permutation. Dense indicator matrices are
// kept when they fit comfortably in memory.
struct GrotheWork {
  const MultiSample* sample = nullptr;
  std::size_t n = 0;
  bool inclusion = false;
  bool dense = false;
  std::vector<std::uint8_t> domx;  // domx[i*n + j] = 1 iff X_j <= X_i, j != i
  std::vector<std::uint8_t> domy;
  std::vector<std::int64_t> rx0;
  std::vector<std::int64_t> ry0;
};

GrotheWork make_grothe_work(const MultiSample& sample, bool inclusion) {
  GrotheWork w;
  w.sample = &sample;
  w.n = sample.n();
  w.inclusion = inclusion;
  w.dense = w.n <= 8192;
  if (w.dense) {
    w.domx.assign(w.n * w.n, 0);
    w.domy.assign(w.n * w.n, 0);
  }
  w.rx0.assign(w.n, inclusion ? 1 : 0);
  w.ry0.assign(w.n, inclusion ? 1 : 0);
  for (std::size_t i = 0; i < w.n; ++i) {
    for (std::size_t j = 0; j < w.n; ++j) {
      if (j == i) continue;
      if (row_le(sample.x(), j, i)) {
        if (w.dense) w.domx[i * w.n + j] = 1;
        ++w.rx0[i];
      }
      if (row_le(sample.y(), j, i)) {
        if (w.dense) w.domy[i * w.n + j] = 1;
        ++w.ry0[i];
      }
    }
  }
  return w;
}

MultiRankProfile grothe_profile(const GrotheWork& w,
                                std::span<const std::size_t> perm) {
  MultiRankProfile p;
  p.self_inclusion = w.inclusion;
  const std::size_t n = w.n;
  p.rx.resize(n);
  p.ry.resize(n);
  p.rxy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.rx[i] = w.rx0[i];
    p.ry[i] = w.ry0[perm[i]];
    std::int64_t joint = w.inclusion ? 1 : 0;
    if (w.dense) {
      const std::uint8_t* xrow = w.domx.data() + i * n;
      const std::uint8_t* yrow = w.domy.data() + perm[i] * n;
      for (std::size_t j = 0; j < n; ++j) {
        joint += xrow[j] & yrow[perm[j]];
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        if (row_le(w.sample->x(), j, i) &&
            row_le(w.sample->y(), perm[j], perm[i])) {
          ++joint;
        }
      }
    }
    p.rxy[i] = joint;
    p.rx_total += p.rx[i];
    p.ry_total += p.ry[i];
    p.rxy_total += joint;
  }
  return p;
}

UniMethod to_uni_method(MvMethod method) {
  switch (method) {
    case MvMethod::xisym: return UniMethod::xisym;
    case MvMethod::spearman: return UniMethod::spearman;
    case MvMethod::kendall: return UniMethod::kendall;
    case MvMethod::cs: return UniMethod::cs;
    case MvMethod::ck: return UniMethod::ck;
  }
  throw std::invalid_argument("mv_test: unknown method");
}

std::vector<double> defined_values(const PermutationDraws& draws) {
  std::vector<double> out;
  out.reserve(draws.values.size());
  for (const auto& v : draws.values) {
    if (v.has_value()) out.push_back(*v);
  }
  return out;
}

}  // namespace

double borel_stat(const MultiSample& sample, MergedStat which,
                  const BorelConfig& config, std::uint64_t tie_seed) {
  const auto xr =
      rank_codes(borel_code_rows(sample.x(), config), derive_seed(tie_seed, 1));
  const auto yr =
      rank_codes(borel_code_rows(sample.y(), config), derive_seed(tie_seed, 2));
  const auto r_xy = concomitant_from_ranks(xr, yr);
  switch (which) {
    case MergedStat::xi: return xi_from_concomitant(r_xy);
    case MergedStat::spearman: return spearman_from_concomitant(r_xy);
    case MergedStat::kendall: return kendall_from_concomitant(r_xy);
  }
  throw std::invalid_argument("borel_stat: unknown statistic");
}

TestOutcome mv_test(const MultiSample& sample, MvMethod method,
                    const MvOptions& options, const PermutationPlan& plan) {
  const std::size_t n = sample.n();
  const std::int64_t n_i = static_cast<std::int64_t>(n);

  if (options.mode == MvMode::borel_analytic) {
    const CodeRanks cr = make_code_ranks(sample, options.borel, options.tie_seed);
    CombinedOptions copts;
    copts.scaling = options.scaling;
    copts.tie_seed = options.tie_seed;
    TestOutcome out =
        univariate_test_on_ranks(cr.xr, cr.yr, to_uni_method(method), copts);
    out.mode = to_string(options.mode);
    return out;
  }

  validate(plan);
  const CodeRanks cr = make_code_ranks(sample, options.borel, options.tie_seed);
  const double xs = xi_component_scale(options.scaling, n_i);
  const double root_n = std::sqrt(static_cast<double>(n));

  const PermStatistic xi_xy_stat =
      [&](std::span<const std::size_t> perm) -> std::optional<double> {
    return xs * xi_from_concomitant(concomitant_xy(cr, perm));
  };
  const PermStatistic xi_yx_stat =
      [&](std::span<const std::size_t> perm) -> std::optional<double> {
    return xs * xi_from_concomitant(concomitant_yx(cr, perm));
  };

  TestOutcome out;
  out.method = to_string(method);
  out.n = n_i;
  out.p_source = PValueSource::permutation;
  out.mode = to_string(options.mode);
  out.seed = plan.master_seed;
  out.permutations = plan.permutations;
  out.degenerate_replicates = 0;

  if (method == MvMethod::xisym) {
    const PermStatistic stat =
        [&](std::span<const std::size_t> perm) -> std::optional<double> {
      return std::max(*xi_xy_stat(perm), *xi_yx_stat(perm));
    };
    const PermutationDraws draws = permutation_draws(n, stat, plan);
    std::int64_t at_least = 0;
    for (const auto& v : draws.values) {
      if (*v >= draws.observed) ++at_least;
    }
    const auto identity = identity_permutation(n);
    out.statistic = draws.observed;
    out.components = {{"xi_xy", *xi_xy_stat(identity)},
                      {"xi_yx", *xi_yx_stat(identity)}};
    out.p_value = static_cast<double>(1 + at_least) /
                  static_cast<double>(plan.permutations + 1);
    return out;
  }

  const bool wants_kendall = method == MvMethod::kendall || method == MvMethod::ck;

  // Monotone statistic, signed: dominance-count form in grothe mode, merged
  // ranks otherwise. Degenerate dominance configurations map to nullopt so
  // only the affected replicates drop out.
  PermStatistic mono_stat;
  std::optional<GrotheWork> work;
  if (options.mode == MvMode::grothe_permutation) {
    work.emplace(make_grothe_work(sample, options.self_inclusion));
    mono_stat = [&work, wants_kendall](
                    std::span<const std::size_t> perm) -> std::optional<double> {
      try {
        const MultiRankProfile profile = grothe_profile(*work, perm);
        return wants_kendall ? grothe_tau(profile) : grothe_spearman(profile);
      } catch (const degenerate_error&) {
        return std::nullopt;
      }
    };
  } else {
    mono_stat = [&cr, wants_kendall](
                    std::span<const std::size_t> perm) -> std::optional<double> {
      const auto r_xy = concomitant_xy(cr, perm);
      return wants_kendall ? kendall_from_concomitant(r_xy)
                           : spearman_from_concomitant(r_xy);
    };
  }

  const PermutationDraws mono = permutation_draws(n, mono_stat, plan);
  out.degenerate_replicates = mono.degenerate;

  if (method == MvMethod::spearman || method == MvMethod::kendall) {
    std::int64_t at_least = 0;
    std::int64_t used = 0;
    const double threshold = std::abs(mono.observed);
    for (const auto& v : mono.values) {
      if (!v.has_value()) continue;
      ++used;
      if (std::abs(*v) >= threshold) ++at_least;
    }
    out.statistic = mono.observed;
    out.components = {{to_string(method), mono.observed}};
    out.p_value =
        static_cast<double>(1 + at_least) / static_cast<double>(used + 1);
    out.null_sd = root_n * sample_sd(defined_values(mono));
    return out;
  }

  // Combined cs / ck: the monotone part is studentized by its estimated
  // asymptotic null sd sigma = sqrt(n) * sd(replicates), then maxed with the
  // two directed xi parts. The same permutation stream backs all three draws,
  // so slots align.
  const PermutationDraws dxy = permutation_draws(n, xi_xy_stat, plan);
  const PermutationDraws dyx = permutation_draws(n, xi_yx_stat, plan);

  const double sigma = root_n * sample_sd(defined_values(mono));
  if (!(sigma > 0.0)) {
    throw degenerate_error("mv_test: monotone statistic constant under permutation");
  }

  const auto combine = [&](double m, double xy, double yx) {
    return std::max({std::abs(m) / sigma, xy, yx});
  };
  const double observed = combine(mono.observed, dxy.observed, dyx.observed);
  std::int64_t at_least = 0;
  std::int64_t used = 0;
  for (std::size_t b = 0; b < mono.values.size(); ++b) {
    if (!mono.values[b].has_value()) continue;
    ++used;
    if (combine(*mono.values[b], *dxy.values[b], *dyx.values[b]) >= observed) {
      ++at_least;
    }
  }
  out.statistic = observed;
  out.components = {{"monotone", std::abs(mono.observed) / sigma},
                    {"xi_xy", dxy.observed},
                    {"xi_yx", dyx.observed}};
  out.p_value =
      static_cast<double>(1 + at_least) / static_cast<double>(used + 1);
  out.null_sd = sigma;
  return out;
}

std::optional<MvMethod> parse_mv_method(std::string_view name) {
  if (name == "xisym") return MvMethod::xisym;
  if (name == "spearman" || name == "s") return MvMethod::spearman;
  if (name == "kendall" || name == "tau") return MvMethod::kendall;
  if (name == "cs") return MvMethod::cs;
  if (name == "ck") return MvMethod::ck;
  return std::nullopt;
}

const char* to_string(MvMethod method) {
  switch (method) {
    case MvMethod::xisym: return "xisym";
    case MvMethod::spearman: return "spearman";
    case MvMethod::kendall: return "kendall";
    case MvMethod::cs: return "cs";
    case MvMethod::ck: return "ck";
  }
  return "unknown";
}

std::optional<MvMode> parse_mv_mode(std::string_view name) {
  if (name == "grothe" || name == "grothe-permutation" ||
      name == "grothe_permutation") {
    return MvMode::grothe_permutation;
  }
  if (name == "borel-analytic" || name == "borel_analytic") {
    return MvMode::borel_analytic;
  }
  if (name == "borel-permutation" || name == "borel_permutation") {
    return MvMode::borel_permutation;
  }
  return std::nullopt;
}

const char* to_string(MvMode mode) {
  switch (mode) {
    case MvMode::grothe_permutation: return "grothe";
    case MvMode::borel_analytic: return "borel-analytic";
    case MvMode::borel_permutation: return "borel-permutation";
  }
  return "unknown";
}

}  // namespace rcor
