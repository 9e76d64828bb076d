#pragma once

// File formats shared by the command-line tool and its consumers.
//
// CSV: plain comma-separated numbers, one header line. Complex cells are two
// adjacent columns (re, im). Doubles are written with 17 significant digits so
// every value reimports bit-exactly.

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qls/config.hpp"
#include "qls/linalg.hpp"

namespace qls::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("not a number: '" + std::string(s) + "'");
  return v;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(',', start);
      cells.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return cells;
  };
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty CSV");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_double(cell));
    if (row.size() != t.header.size()) throw ConfigError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Real matrix, row-major; header c1..cN.
inline CsvTable real_matrix_table(const MatrixXd& m) {
  CsvTable t;
  for (Eigen::Index j = 0; j < m.cols(); ++j) t.header.push_back("c" + std::to_string(j + 1));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Complex matrix, row-major; header c1_re,c1_im,...
inline CsvTable complex_matrix_table(const MatrixXcd& m) {
  CsvTable t;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    t.header.push_back("c" + std::to_string(j + 1) + "_re");
    t.header.push_back("c" + std::to_string(j + 1) + "_im");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(2 * m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j).real());
      row.push_back(m(i, j).imag());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline MatrixXd table_to_real_matrix(const CsvTable& t) {
  MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = t.rows[i][j];
  return m;
}

inline MatrixXcd table_to_complex_matrix(const CsvTable& t) {
  if (t.header.size() % 2) throw ConfigError("complex CSV needs an even column count");
  const auto cols = static_cast<Eigen::Index>(t.header.size() / 2);
  MatrixXcd m(static_cast<Eigen::Index>(t.rows.size()), cols);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(Eigen::Index(i), j) = cplx(t.rows[i][std::size_t(2 * j)], t.rows[i][std::size_t(2 * j + 1)]);
  return m;
}

/// Bundle of equally sized complex matrices: columns state,row then re/im pairs.
inline CsvTable complex_bundle_table(const std::vector<MatrixXcd>& mats) {
  CsvTable t;
  t.header = {"state", "row"};
  const auto cols = mats.empty() ? 0 : mats.front().cols();
  for (Eigen::Index j = 0; j < cols; ++j) {
    t.header.push_back("c" + std::to_string(j + 1) + "_re");
    t.header.push_back("c" + std::to_string(j + 1) + "_im");
  }
  for (std::size_t s = 0; s < mats.size(); ++s) {
    for (Eigen::Index i = 0; i < mats[s].rows(); ++i) {
      std::vector<double> row{double(s), double(i + 1)};
      for (Eigen::Index j = 0; j < cols; ++j) {
        row.push_back(mats[s](i, j).real());
        row.push_back(mats[s](i, j).imag());
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

inline std::vector<MatrixXcd> table_to_complex_bundle(const CsvTable& t) {
  if (t.header.size() < 2 || t.header[0] != "state") throw ConfigError("not a state bundle");
  const auto cols = static_cast<Eigen::Index>((t.header.size() - 2) / 2);
  std::vector<MatrixXcd> mats;
  std::vector<std::vector<const std::vector<double>*>> rows;
  for (const auto& r : t.rows) {
    const auto s = static_cast<std::size_t>(r[0]);
    if (s >= rows.size()) rows.resize(s + 1);
    rows[s].push_back(&r);
  }
  for (const auto& block : rows) {
    MatrixXcd m(static_cast<Eigen::Index>(block.size()), cols);
    for (std::size_t i = 0; i < block.size(); ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        m(Eigen::Index(i), j) = cplx((*block[i])[std::size_t(2 + 2 * j)], (*block[i])[std::size_t(3 + 2 * j)]);
    mats.push_back(std::move(m));
  }
  return mats;
}

// ---------------------------------------------------------------------------
// JSON

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline cplx complex_from_json(const json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing " + path.string());
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Hashing and run manifest

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  std::string command;
  json config = json::object();
  std::string version;
  double duration_seconds = 0.0;
  std::vector<OutputFile> outputs;
  json details = json::object();  // command-specific summary (sweep failures, fits, ...)
};

inline json to_json(const RunManifest& m) {
  json files = json::array();
  for (const auto& f : m.outputs) files.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return json{{"command", m.command},       {"version", m.version},
              {"config", m.config},         {"duration_seconds", m.duration_seconds},
              {"outputs", std::move(files)}, {"details", m.details}};
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.config = j.at("config");
  m.duration_seconds = j.at("duration_seconds").get<double>();
  for (const auto& f : j.at("outputs")) m.outputs.push_back({f.at("path"), f.at("sha256")});
  m.details = j.value("details", json::object());
  return m;
}

}  // namespace qls::io
