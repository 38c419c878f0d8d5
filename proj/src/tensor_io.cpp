#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "rankone/error.hpp"
#include "rankone/tensor.hpp"

namespace rankone {

namespace {

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
            ++pos;
        std::size_t end = pos;
        while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])))
            ++end;
        if (end > pos)
            tokens.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return tokens;
}

std::size_t parse_positive(std::string_view token, std::size_t line, const char* what)
{
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value == 0)
        throw ParseError(line, std::string("expected a positive integer ") + what + ", got '" +
                                   std::string(token) + "'");
    return value;
}

double parse_real(std::string_view token, std::size_t line)
{
    std::string s(token);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v))
        throw ParseError(line, "expected a finite real number, got '" + s + "'");
    return v;
}

} // namespace

Tensor read_tensor_text(std::istream& in)
{
    std::string text;
    std::size_t line_no = 0;

    if (!std::getline(in, text))
        throw ParseError(1, "missing order line");
    ++line_no;
    auto tokens = split_ws(text);
    if (tokens.size() != 1)
        throw ParseError(line_no, "order line must hold exactly one integer");
    const std::size_t d = parse_positive(tokens[0], line_no, "order");

    if (!std::getline(in, text))
        throw ParseError(2, "missing dimensions line");
    ++line_no;
    tokens = split_ws(text);
    if (tokens.size() != d)
        throw ParseError(line_no, "dimensions line must hold " + std::to_string(d) +
                                      " integers, found " + std::to_string(tokens.size()));
    Shape dims;
    std::size_t count = 1;
    for (auto tok : tokens) {
        dims.push_back(parse_positive(tok, line_no, "dimension"));
        if (count > std::numeric_limits<std::size_t>::max() / dims.back())
            throw ParseError(line_no, "tensor too large");
        count *= dims.back();
    }

    std::vector<double> values;
    values.reserve(count);
    while (std::getline(in, text)) {
        ++line_no;
        for (auto tok : split_ws(text)) {
            if (values.size() == count)
                throw ParseError(line_no, "more than " + std::to_string(count) + " entries");
            values.push_back(parse_real(tok, line_no));
        }
    }
    if (values.size() != count)
        throw ParseError(line_no + 1, "expected " + std::to_string(count) + " entries, found " +
                                          std::to_string(values.size()));
    return Tensor(std::move(dims), std::move(values));
}

Tensor read_tensor_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(0, "cannot open '" + path + "'");
    return read_tensor_text(in);
}

void write_tensor_text(std::ostream& out, const Tensor& t)
{
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << t.order() << '\n';
    for (std::size_t k = 0; k < t.order(); ++k)
        buf << (k ? " " : "") << t.dim(k);
    buf << '\n';
    // one line per trailing fiber keeps the files readable
    const std::size_t row = t.dim(t.order() - 1);
    const auto data = t.data();
    for (std::size_t i = 0; i < data.size(); ++i)
        buf << data[i] << ((i + 1) % row == 0 ? '\n' : ' ');
    out << buf.str();
}

} // namespace rankone
