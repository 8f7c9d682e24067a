// io.hpp: CSV tables, JSON encodings of matrices and decompositions, and
// a minimal standalone SVG line-plot writer.

#pragma once

#include "ethq/algebra.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ethq {

inline constexpr const char* kVersion = "0.1.0";

// 17 significant digits: doubles round-trip exactly.
std::string format_double(double x);

class CsvTable {
public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    // Cells are formatted by the caller; the row length must match the header.
    void add_row(std::vector<std::string> cells);

    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

    static CsvTable parse(const std::string& text);
    static CsvTable read(const std::filesystem::path& path);
    // Column by header name, converted with std::stod.
    std::vector<double> column(const std::string& name) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Row-major [[ [re, im], ... ], ...].
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// {ambient_dim, null_dim, sectors: [{d1, d2, iso}], null_iso}
nlohmann::json decomposition_to_json(const GeneralizedBipartition& bp);
GeneralizedBipartition decomposition_from_json(const nlohmann::json& j);

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

std::string render_svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ethq
