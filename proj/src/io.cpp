#include "sopt/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sopt {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void check_cell(const std::string& cell) {
  if (cell.find_first_of(",\n\r") != std::string::npos)
    throw std::runtime_error("csv cell contains a separator: " + cell);
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::string text = read_file(path);
  CsvTable t;
  size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = nl + 1;
    if (line.empty()) continue;
    if (first) {
      t.header = split_line(line);
      first = false;
    } else {
      auto row = split_line(line);
      if (row.size() != t.header.size())
        throw std::runtime_error("csv row width mismatch in " + path.string());
      t.rows.push_back(std::move(row));
    }
  }
  if (first) throw std::runtime_error("csv file has no header: " + path.string());
  return t;
}

std::string csv_to_string(const CsvTable& table) {
  std::ostringstream out;
  for (size_t i = 0; i < table.header.size(); ++i) {
    check_cell(table.header[i]);
    out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      check_cell(row[i]);
      out << row[i] << (i + 1 < row.size() ? "," : "");
    }
    out << "\n";
  }
  return out.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  atomic_write(path, csv_to_string(table));
}

std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace sopt
