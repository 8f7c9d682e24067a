#include "ethq/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ethq {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw std::invalid_argument("CsvTable: row length does not match header");
    rows_.push_back(std::move(cells));
}

namespace {
std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        if (cells[i].find_first_of(",\"\n") != std::string::npos) {
            throw std::invalid_argument("CsvTable: cells must not contain separators or quotes");
        }
        out += cells[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}
}  // namespace

std::string CsvTable::str() const {
    std::string out = join(header_) + '\n';
    for (const auto& r : rows_) out += join(r) + '\n';
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text_file(path, str()); }

CsvTable CsvTable::parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("CsvTable::parse: missing header");
    CsvTable t(split(line));
    while (std::getline(is, line)) {
        if (!line.empty()) t.add_row(split(line));
    }
    return t;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("CsvTable::read: cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse(os.str());
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) throw std::invalid_argument("CsvTable: no column " + name);
    const std::size_t c = static_cast<std::size_t>(it - header_.begin());
    std::vector<double> out;
    for (const auto& r : rows_) out.push_back(std::stod(r[c]));
    return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("matrix_from_json: expected an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows ? static_cast<Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw std::invalid_argument("matrix_from_json: ragged rows");
        for (Index c = 0; c < cols; ++c) {
            const auto& e = row.at(static_cast<std::size_t>(c));
            if (e.is_number()) {
                m(i, c) = e.get<double>();
            } else if (e.is_array() && e.size() == 2) {
                m(i, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
            } else {
                throw std::invalid_argument("matrix_from_json: entries must be numbers or [re, im]");
            }
        }
    }
    return m;
}

nlohmann::json decomposition_to_json(const GeneralizedBipartition& bp) {
    nlohmann::json sectors = nlohmann::json::array();
    for (const Sector& s : bp.sectors()) {
        sectors.push_back({{"d1", s.d1}, {"d2", s.d2}, {"iso", matrix_to_json(s.iso)}});
    }
    return {{"ambient_dim", bp.ambient_dim()},
            {"null_dim", bp.null_dim()},
            {"sectors", std::move(sectors)},
            {"null_iso", matrix_to_json(bp.null_iso())}};
}

GeneralizedBipartition decomposition_from_json(const nlohmann::json& j) {
    try {
        const Index n = j.at("ambient_dim").get<Index>();
        std::vector<Sector> sectors;
        for (const auto& s : j.at("sectors")) {
            sectors.push_back({matrix_from_json(s.at("iso")), s.at("d1").get<Index>(), s.at("d2").get<Index>(), {}});
        }
        Matrix null_iso = matrix_from_json(j.at("null_iso"));
        if (null_iso.size() == 0) null_iso = Matrix::Zero(n, j.at("null_dim").get<Index>());
        return GeneralizedBipartition(n, std::move(sectors), std::move(null_iso));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("decomposition_from_json: ") + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

namespace {
std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}
}  // namespace

std::string render_svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    constexpr double width = 640, height = 420, left = 70, right = 150, top = 40, bottom = 55;
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if ((spec.log_x && s.x[i] <= 0) || (spec.log_y && s.y[i] <= 0)) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double v) { return left + (tx(v) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return top + ph - (ty(v) - ymin) / (ymax - ymin) * ph; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n"
       << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(spec.title) << "</text>\n"
       << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
       << escape_xml(spec.x_label) << (spec.log_x ? " (log10)" : "") << "</text>\n"
       << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
       << top + ph / 2 << ")\">" << escape_xml(spec.y_label) << (spec.log_y ? " (log10)" : "") << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0, fy = ymin + (ymax - ymin) * t / 4.0;
        os << "<text x=\"" << left + pw * t / 4.0 << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
           << format_double(std::round(fx * 1000) / 1000) << "</text>\n"
           << "<text x=\"" << left - 6 << "\" y=\"" << top + ph - ph * t / 4.0 + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
           << format_double(std::round(fy * 1000) / 1000) << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if ((spec.log_x && s.x[i] <= 0) || (spec.log_y && s.y[i] <= 0)) continue;
            os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        os << "\"/>\n"
           << "<text x=\"" << width - right + 10 << "\" y=\"" << top + 16 * (k + 1) << "\" font-size=\"11\" fill=\"" << color
           << "\">" << escape_xml(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace ethq
