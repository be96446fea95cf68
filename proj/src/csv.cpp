#include "sae/csv.hpp"

#include <ostream>
#include <stdexcept>

namespace sae::csv {

std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;
    std::size_t line = 1;
    std::size_t quote_line = 0;

    auto end_row = [&] {
        if (row_has_content || !row.empty()) {
            row.push_back(std::move(field));
            rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n')
                    ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            quote_line = line;
            row_has_content = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            row_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            ++line;
            break;
        default:
            field += c;
            row_has_content = true;
        }
    }
    if (in_quotes)
        throw std::invalid_argument("unterminated quoted field starting on line " +
                                    std::to_string(quote_line));
    end_row();
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out << ',';
        out << escape(fields[i]);
    }
    out << "\r\n";
}

} // namespace sae::csv
