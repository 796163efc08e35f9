#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sopt {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string csv_to_string(const CsvTable& table);

std::string read_file(const std::filesystem::path& path);

// Temp-file-then-rename so readers never observe a partial artifact.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

}  // namespace sopt
