#include "qfdr/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace qfdr {

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (quoted) throw FormatError("unterminated quote in CSV line");
    fields.push_back(std::move(current));
    return fields;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

double parse_double(std::string_view s, const std::string& what) {
    const std::string buf(s);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size()) {
        throw FormatError("cannot parse " + what + " from '" + buf + "'");
    }
    return v;
}

std::uint64_t parse_u64(std::string_view s, const std::string& what) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError("cannot parse " + what + " from '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw FormatError("row width does not match header");
    rows.push_back(std::move(row));
}

std::string format_cell(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

Cell parse_cell(std::string_view text) {
    if (text == "true") return true;
    if (text == "false") return false;
    std::int64_t iv = 0;
    if (const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), iv);
        ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) {
        return iv;
    }
    const std::string buf(text);
    char* end = nullptr;
    const double dv = std::strtod(buf.c_str(), &end);
    if (!buf.empty() && end == buf.c_str() + buf.size()) return dv;
    return buf;
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += quote_if_needed(table.columns[c]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += quote_if_needed(format_cell(row[c]));
        }
        out += '\n';
    }
    return out;
}

Table parse_csv(std::string_view text) {
    const auto lines = split_lines(text);
    Table table;
    bool have_header = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_csv_line(line);
        if (!have_header) {
            table.columns = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw FormatError("line " + std::to_string(i + 1) + ": expected " +
                              std::to_string(table.columns.size()) + " fields");
        }
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_cell(f));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw FormatError("CSV has no header");
    return table;
}

std::string to_json(const Table& table) {
    auto records = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json rec = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit([&](const auto& v) { rec[table.columns[c]] = v; }, row[c]);
        }
        records.push_back(std::move(rec));
    }
    return records.dump(2) + "\n";
}

std::string render(const Table& table, OutputFormat format) {
    return format == OutputFormat::csv ? to_csv(table) : to_json(table);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Sample record files
// ---------------------------------------------------------------------------

std::string format_samples(const WorkSampleSet& s) {
    std::ostringstream out;
    auto num = [](double v) { return format_cell(v); };
    out << "# qfdr-samples v1\n";
    out << "# kind=" << to_string(s.spec.kind()) << '\n';
    out << "# n_steps=" << s.spec.n_steps() << '\n';
    out << "# beta=" << num(s.spec.thermal().beta()) << '\n';
    out << "# omega_start=" << num(s.spec.omega_start()) << '\n';
    out << "# omega_end=" << num(s.spec.omega_end()) << '\n';
    if (s.spam) {
        out << "# spam_b0=" << num(s.spam->p_bright_given_0()) << '\n';
        out << "# spam_d1=" << num(s.spam->p_dark_given_1()) << '\n';
        out << "# spam_convention="
            << (s.convention == SpamConvention::marginal ? "marginal" : "conditioned") << '\n';
    }
    out << "# flip_probability=" << num(s.flip_probability) << '\n';
    out << "# seed=" << s.seed << '\n';
    out << "# runs=" << s.runs() << '\n';
    out << "# steps=" << s.counts.steps << '\n';
    out << "# excited_first=" << s.counts.excited_first << '\n';
    out << "# positive=" << s.counts.positive << '\n';
    out << "# negative=" << s.counts.negative << '\n';
    Table table{{"run_index", "total_work"}, {}};
    table.rows.reserve(s.totals.size());
    for (std::size_t r = 0; r < s.totals.size(); ++r) {
        table.rows.push_back({static_cast<std::int64_t>(r), s.totals[r]});
    }
    out << to_csv(table);
    return out.str();
}

WorkSampleSet parse_samples(std::string_view text) {
    std::map<std::string, std::string, std::less<>> header;
    for (const auto line : split_lines(text)) {
        if (line.empty() || line.front() != '#') continue;
        const auto body = line.substr(line.find_first_not_of("# "));
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) continue;
        header.emplace(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
    }
    auto get = [&](const char* key) -> const std::string& {
        const auto it = header.find(key);
        if (it == header.end()) throw FormatError(std::string("sample file lacks '") + key + "'");
        return it->second;
    };

    const auto thermal = ThermalSpec::from_beta(parse_double(get("beta"), "beta"));
    const int n_steps = static_cast<int>(parse_u64(get("n_steps"), "n_steps"));
    const std::string& kind = get("kind");
    std::optional<ProtocolSpec> spec;
    if (kind == "coherent") {
        spec = ProtocolSpec::coherent(n_steps, thermal);
    } else if (kind == "incoherent") {
        spec = ProtocolSpec::incoherent(n_steps, thermal,
                                        parse_double(get("omega_start"), "omega_start"),
                                        parse_double(get("omega_end"), "omega_end"));
    } else {
        throw FormatError("unknown protocol kind '" + kind + "'");
    }

    WorkSampleSet s{*spec, std::nullopt, SpamConvention::marginal, 0.0, 0, {}, {}};
    if (header.contains("spam_b0")) {
        s.spam = SpamModel(parse_double(get("spam_b0"), "spam_b0"),
                           parse_double(get("spam_d1"), "spam_d1"));
        const std::string& conv = get("spam_convention");
        if (conv == "conditioned") {
            s.convention = SpamConvention::conditioned;
        } else if (conv != "marginal") {
            throw FormatError("unknown spam convention '" + conv + "'");
        }
    }
    s.flip_probability = parse_double(get("flip_probability"), "flip_probability");
    s.seed = parse_u64(get("seed"), "seed");
    s.counts.steps = parse_u64(get("steps"), "steps");
    s.counts.excited_first = parse_u64(get("excited_first"), "excited_first");
    s.counts.positive = parse_u64(get("positive"), "positive");
    s.counts.negative = parse_u64(get("negative"), "negative");

    const Table table = parse_csv(text);
    if (table.columns != std::vector<std::string>{"run_index", "total_work"}) {
        throw FormatError("sample table must have columns run_index,total_work");
    }
    s.totals.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto* index = std::get_if<std::int64_t>(&row[0]);
        if (!index || *index != static_cast<std::int64_t>(r)) {
            throw FormatError("run_index column is not 0..M-1 in order");
        }
        double w = 0.0;
        if (const auto* i = std::get_if<std::int64_t>(&row[1])) {
            w = static_cast<double>(*i);
        } else if (const auto* d = std::get_if<double>(&row[1])) {
            w = *d;
        } else {
            throw FormatError("non-numeric total_work at row " + std::to_string(r));
        }
        s.totals.push_back(w);
    }
    if (s.totals.size() != parse_u64(get("runs"), "runs")) {
        throw FormatError("runs header does not match row count");
    }
    return s;
}

}  // namespace qfdr
