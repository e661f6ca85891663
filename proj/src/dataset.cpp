#include "connselect/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "connselect/diagnostics.hpp"
#include "connselect/parallel.hpp"

namespace connselect {
namespace fs = std::filesystem;
namespace {

constexpr double kAsymmetryWarn = 1e-8;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(const fs::path& file, std::size_t line) {
  return fmt::format("{}:{}", file.string(), line);
}

double parse_number(std::string_view text, const fs::path& file, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ValidationError(fmt::format("{}: '{}' is not a number", where(file, line), text));
  }
  if (!std::isfinite(value)) {
    throw ValidationError(fmt::format("{}: non-finite value '{}'", where(file, line), text));
  }
  return value;
}

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(fmt::format("{}: cannot open file", file.string()));
  return in;
}

std::ofstream open_output(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError(fmt::format("{}: cannot write file", file.string()));
  return out;
}

struct SubjectRow {
  std::string id;
  double fiq;
  double viq;
};

std::vector<SubjectRow> read_subjects(const fs::path& file) {
  std::ifstream in = open_input(file);
  std::vector<SubjectRow> rows;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "id" || fields[1] != "fiq" || fields[2] != "viq") {
        throw ValidationError(
            fmt::format("{}: expected header 'id,fiq,viq'", where(file, line_no)));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ValidationError(
          fmt::format("{}: expected 3 fields, found {}", where(file, line_no), fields.size()));
    }
    if (fields[0].empty()) throw ValidationError(fmt::format("{}: empty subject id", where(file, line_no)));
    std::string id(fields[0]);
    if (!ids.insert(id).second) {
      throw ValidationError(fmt::format("{}: duplicate subject id '{}'", where(file, line_no), id));
    }
    rows.push_back({std::move(id), parse_number(fields[1], file, line_no),
                    parse_number(fields[2], file, line_no)});
  }
  if (!header_seen) throw ValidationError(fmt::format("{}: file is empty", file.string()));
  return rows;
}

std::vector<std::string> read_roi_names(const fs::path& file, Eigen::Index dim) {
  std::ifstream in = open_input(file);
  std::vector<std::string> names(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) names[static_cast<std::size_t>(i)] = std::to_string(i);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (text == "index,name") continue;
    }
    const std::size_t comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw ValidationError(fmt::format("{}: expected 'index,name'", where(file, line_no)));
    }
    const double index = parse_number(trim(text.substr(0, comma)), file, line_no);
    if (index < 0 || index >= static_cast<double>(dim) || index != std::floor(index)) {
      throw ValidationError(
          fmt::format("{}: ROI index {} outside [0, {})", where(file, line_no), index, dim));
    }
    names[static_cast<std::size_t>(index)] = std::string(trim(text.substr(comma + 1)));
  }
  return names;
}

}  // namespace

std::string_view to_string(Target target) { return target == Target::Fiq ? "fiq" : "viq"; }

Target parse_target(std::string_view text) {
  if (text == "fiq") return Target::Fiq;
  if (text == "viq") return Target::Viq;
  throw ValidationError(fmt::format("unknown target '{}' (expected fiq or viq)", text));
}

Vector Dataset::scores(Target target) const {
  Vector out(static_cast<Eigen::Index>(subjects.size()));
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = subjects[i].score(target);
  }
  return out;
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

Matrix read_matrix_csv(const fs::path& file) {
  std::ifstream in = open_input(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto f : fields) row.push_back(parse_number(f, file, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError(fmt::format("{}: ragged matrix: row {} has {} values, expected {}",
                                        where(file, line_no), rows.size() + 1, row.size(),
                                        rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(fmt::format("{}: matrix file is empty", file.string()));
  const std::size_t d = rows.front().size();
  if (rows.size() != d) {
    throw ValidationError(fmt::format("{}: matrix has {} rows of {} values; expected a square matrix",
                                      file.string(), rows.size(), d));
  }
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_matrix_csv(const Matrix& m, const fs::path& file) {
  std::ofstream out = open_output(file);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ValidationError(fmt::format("{}: dataset directory not found", dir.string()));
  }
  const fs::path subjects_file = dir / "subjects.csv";
  if (!fs::exists(subjects_file)) {
    throw ValidationError(fmt::format("{}: missing subjects.csv", dir.string()));
  }
  auto rows = read_subjects(subjects_file);
  if (rows.empty()) throw ValidationError(fmt::format("{}: no subjects listed", subjects_file.string()));
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::vector<Matrix> matrices(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const fs::path file = dir / "matrices" / (rows[i].id + ".csv");
    if (!fs::exists(file)) {
      throw ValidationError(
          fmt::format("{}: missing matrix file for subject '{}'", file.string(), rows[i].id));
    }
    matrices[i] = read_matrix_csv(file);
  });

  Dataset dataset;
  dataset.subjects.reserve(rows.size());
  const Eigen::Index d = matrices.front().rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string file = (dir / "matrices" / (rows[i].id + ".csv")).string();
    Matrix& m = matrices[i];
    if (m.rows() != d) {
      throw ValidationError(
          fmt::format("{}: matrix is {}x{}, other subjects are {}x{}", file, m.rows(), m.cols(), d, d));
    }
    const double gap = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (gap > kAsymmetryWarn) {
      warn(fmt::format("{}: asymmetry {:.3g} exceeds 1e-8; matrix symmetrized", file, gap));
    }
    m = (0.5 * (m + m.transpose())).eval();
    Connectome c(std::move(m));
    for (const auto& issue : correlation_issues(c)) warn(fmt::format("{}: {}", file, issue));
    dataset.subjects.push_back({std::move(rows[i].id), std::move(c), rows[i].fiq, rows[i].viq});
  }

  const fs::path names_file = dir / "roi_names.csv";
  if (fs::exists(names_file)) dataset.roi_names = read_roi_names(names_file, d);
  return dataset;
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir / "matrices");
  {
    std::ofstream out = open_output(dir / "subjects.csv");
    out << "id,fiq,viq\n";
    for (const auto& s : dataset.subjects) {
      out << s.id << ',' << format_double(s.fiq) << ',' << format_double(s.viq) << '\n';
    }
  }
  for (const auto& s : dataset.subjects) {
    write_matrix_csv(s.connectome.matrix(), dir / "matrices" / (s.id + ".csv"));
  }
  if (!dataset.roi_names.empty()) {
    std::ofstream out = open_output(dir / "roi_names.csv");
    out << "index,name\n";
    for (std::size_t i = 0; i < dataset.roi_names.size(); ++i) {
      out << i << ',' << dataset.roi_names[i] << '\n';
    }
  }
}

}  // namespace connselect
