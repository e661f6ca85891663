#include "connselect/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "connselect/diagnostics.hpp"

namespace connselect {
namespace fs = std::filesystem;
namespace {

Matrix random_symmetric(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      m(i, j) = normal(rng);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

Matrix unit_symmetric(Eigen::Index d, std::mt19937_64& rng) {
  Matrix m = random_symmetric(d, rng);
  return m / m.norm();
}

// D^-1/2 M D^-1/2 with an exact unit diagonal.
Matrix to_correlation(const Matrix& m) {
  const Vector inv_sqrt = m.diagonal().cwiseSqrt().cwiseInverse();
  Matrix c = inv_sqrt.asDiagonal() * m * inv_sqrt.asDiagonal();
  c = (0.5 * (c + c.transpose())).eval();
  c.diagonal().setOnes();
  return c;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_value(std::string_view text, std::string_view key, const fs::path& file, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(
        fmt::format("{}:{}: invalid value '{}' for '{}'", file.string(), line, text, key));
  }
  return value;
}

}  // namespace

std::vector<double> SynthSpec::resolved_centers() const {
  if (!centers.empty()) return centers;
  std::vector<double> out(static_cast<std::size_t>(std::max(clusters, 0)));
  const double mid = 0.5 * (clusters - 1);
  for (int c = 0; c < clusters; ++c) out[static_cast<std::size_t>(c)] = 100.0 + 15.0 * (c - mid);
  return out;
}

void SynthSpec::validate() const {
  if (clusters < 1) throw ValidationError("synth: clusters must be at least 1");
  if (n < clusters) throw ValidationError(fmt::format("synth: n = {} is below the cluster count {}", n, clusters));
  if (d < 2) throw ValidationError(fmt::format("synth: d = {} must be at least 2", d));
  if (!centers.empty() && centers.size() != static_cast<std::size_t>(clusters)) {
    throw ValidationError(fmt::format("synth: {} centers given for {} clusters", centers.size(), clusters));
  }
  if (!(noise >= 0.0)) throw ValidationError("synth: noise must be nonnegative");
  if (!(within_std >= 0.0)) throw ValidationError("synth: within_std must be nonnegative");
  if (!(viq_jitter >= 0.0)) throw ValidationError("synth: viq_jitter must be nonnegative");
  if (!(base_scale >= 0.0)) throw ValidationError("synth: base_scale must be nonnegative");
  if (!(score_scale > 0.0)) throw ValidationError("synth: score_scale must be positive");
  if (outliers < 0 || outliers > n) {
    throw ValidationError(fmt::format("synth: outlier count {} outside [0, {}]", outliers, n));
  }
}

SyntheticCohort generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::vector<double> centers = spec.resolved_centers();
  const double reference = std::accumulate(centers.begin(), centers.end(), 0.0) /
                           static_cast<double>(centers.size());
  const Eigen::Index d = spec.d;
  const auto n = static_cast<std::size_t>(spec.n);

  std::mt19937_64 rng(spec.seed);
  Matrix base = random_symmetric(d, rng);
  base *= spec.base_scale / base.norm();
  const Matrix direction = unit_symmetric(d, rng);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  SyntheticCohort out;
  out.cluster.resize(n);
  out.outlier.assign(n, false);
  std::vector<int> outlier_rank(n, -1);
  for (int r = 0; r < spec.outliers; ++r) {
    out.outlier[order[static_cast<std::size_t>(r)]] = true;
    outlier_rank[order[static_cast<std::size_t>(r)]] = r;
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  out.dataset.subjects.reserve(n);
  out.latent.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(spec.clusters));
    out.cluster[i] = c;
    const double center = centers[static_cast<std::size_t>(c)];
    const double jitter = normal(rng);
    double fiq = center + spec.within_std * jitter;
    if (out.outlier[i]) {
      fiq = center + (outlier_rank[i] % 2 == 0 ? spec.outlier_offset : -spec.outlier_offset);
    }
    const double viq = fiq + spec.viq_jitter * normal(rng);
    const Matrix noise = unit_symmetric(d, rng);

    const Matrix log_point = base + ((fiq - reference) / spec.score_scale) * direction + spec.noise * noise;
    SpdMatrix latent = expm(TangentMatrix(log_point));
    Connectome connectome(to_correlation(latent.matrix()));
    out.dataset.subjects.push_back(
        {fmt::format("sub-{:04d}", i + 1), std::move(connectome), fiq, viq});
    out.latent.push_back(std::move(latent));
  }
  return out;
}

SynthSpec read_synth_spec(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(fmt::format("{}: cannot open synth spec", file.string()));
  SynthSpec spec;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(fmt::format("{}:{}: expected key=value", file.string(), line));
    }
    const std::string_view key = trim(text.substr(0, eq));
    const std::string_view value = trim(text.substr(eq + 1));
    if (key == "n") spec.n = parse_value<int>(value, key, file, line);
    else if (key == "d") spec.d = parse_value<int>(value, key, file, line);
    else if (key == "clusters") spec.clusters = parse_value<int>(value, key, file, line);
    else if (key == "within_std") spec.within_std = parse_value<double>(value, key, file, line);
    else if (key == "outliers") spec.outliers = parse_value<int>(value, key, file, line);
    else if (key == "outlier_offset") spec.outlier_offset = parse_value<double>(value, key, file, line);
    else if (key == "noise") spec.noise = parse_value<double>(value, key, file, line);
    else if (key == "score_scale") spec.score_scale = parse_value<double>(value, key, file, line);
    else if (key == "base_scale") spec.base_scale = parse_value<double>(value, key, file, line);
    else if (key == "viq_jitter") spec.viq_jitter = parse_value<double>(value, key, file, line);
    else if (key == "seed") spec.seed = parse_value<std::uint64_t>(value, key, file, line);
    else if (key == "centers") {
      spec.centers.clear();
      std::size_t start = 0;
      while (start <= value.size()) {
        const std::size_t comma = value.find(',', start);
        const std::string_view item =
            trim(value.substr(start, comma == std::string_view::npos ? comma : comma - start));
        spec.centers.push_back(parse_value<double>(item, key, file, line));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    } else {
      throw ValidationError(fmt::format("{}:{}: unknown key '{}'", file.string(), line, key));
    }
  }
  spec.validate();
  return spec;
}

void write_synthetic(const SyntheticCohort& cohort, const fs::path& dir) {
  write_dataset(cohort.dataset, dir);
  std::ofstream out(dir / "ground_truth.csv");
  if (!out) throw ValidationError(fmt::format("{}: cannot write ground_truth.csv", dir.string()));
  out << "id,cluster,outlier\n";
  for (std::size_t i = 0; i < cohort.dataset.subjects.size(); ++i) {
    out << cohort.dataset.subjects[i].id << ',' << cohort.cluster[i] << ','
        << (cohort.outlier[i] ? 1 : 0) << '\n';
  }
}

}  // namespace connselect
