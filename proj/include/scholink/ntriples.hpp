#pragma once
// Streaming N-Triples reader.
//
// One statement per line: <s> <p> (<o> | "lit"[@lang | ^^<dt>]) .
// Blank lines and '#' comment lines are ignored. Blank nodes are rejected:
// the store only keys entities by absolute IRI.

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <streambuf>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <zlib.h>

#include "scholink/error.hpp"

namespace scholink {

struct Iri {
    std::string value;
    bool operator==(const Iri&) const = default;
};

struct Literal {
    std::string lexical;
    std::string language;  // empty when absent
    std::string datatype;  // empty when absent
    bool operator==(const Literal&) const = default;
};

struct Triple {
    std::string subject;
    std::string predicate;
    std::variant<Iri, Literal> object;

    bool object_is_iri() const noexcept { return std::holds_alternative<Iri>(object); }
    const Iri& object_iri() const { return std::get<Iri>(object); }
    const Literal& object_literal() const { return std::get<Literal>(object); }

    bool operator==(const Triple&) const = default;
};

enum class ParseMode { Abort, Skip };

struct ParseStats {
    std::size_t lines = 0;
    std::size_t triples = 0;
    std::size_t malformed = 0;
    std::vector<ParseError> first_errors;  // capped at 20 in Skip mode
};

namespace detail {

inline bool is_absolute_iri(std::string_view iri) {
    std::size_t colon = iri.find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    if (!alpha(iri[0])) return false;
    for (std::size_t i = 1; i < colon; ++i) {
        char c = iri[i];
        if (!(alpha(c) || (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.')) return false;
    }
    return true;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_number)
        : s_(line), line_(line_number) {}

    Triple parse() {
        Triple t;
        skip_ws();
        t.subject = subject();
        skip_ws();
        t.predicate = iri("predicate");
        skip_ws();
        t.object = object();
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '.') fail("expected terminating '.'");
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected content after '.'");
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& reason) const { throw ParseError(line_, reason); }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }

    std::string subject() {
        if (pos_ < s_.size() && s_[pos_] == '_') fail("blank node subjects are not supported");
        return iri("subject");
    }

    std::variant<Iri, Literal> object() {
        if (pos_ >= s_.size()) fail("missing object");
        if (s_[pos_] == '<') return Iri{iri("object")};
        if (s_[pos_] == '"') return literal();
        if (s_[pos_] == '_') fail("blank node objects are not supported");
        fail("object must be an IRI or a literal");
    }

    std::uint32_t hex(std::size_t digits) {
        if (pos_ + digits > s_.size()) fail("truncated \\u escape");
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            char c = s_[pos_++];
            v <<= 4;
            if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
            else fail("bad hex digit in escape");
        }
        if (v > 0x10FFFF || (v >= 0xD800 && v <= 0xDFFF)) fail("escape is not a scalar value");
        return v;
    }

    std::string iri(const char* what) {
        if (pos_ >= s_.size() || s_[pos_] != '<') fail(std::string("expected IRI for ") + what);
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= s_.size()) fail("unterminated IRI");
            char c = s_[pos_++];
            if (c == '>') break;
            if (c == '\\') {
                if (pos_ >= s_.size()) fail("dangling escape in IRI");
                char e = s_[pos_++];
                if (e == 'u') append_utf8(out, hex(4));
                else if (e == 'U') append_utf8(out, hex(8));
                else fail("invalid escape in IRI");
                continue;
            }
            if (c == ' ' || c == '<' || c == '"') fail("invalid character in IRI");
            out.push_back(c);
        }
        if (!is_absolute_iri(out)) fail(std::string(what) + " is not an absolute IRI");
        return out;
    }

    Literal literal() {
        ++pos_;  // opening quote
        Literal lit;
        while (true) {
            if (pos_ >= s_.size()) fail("unterminated literal");
            char c = s_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                lit.lexical.push_back(c);
                continue;
            }
            if (pos_ >= s_.size()) fail("dangling escape in literal");
            char e = s_[pos_++];
            switch (e) {
                case 't': lit.lexical.push_back('\t'); break;
                case 'b': lit.lexical.push_back('\b'); break;
                case 'n': lit.lexical.push_back('\n'); break;
                case 'r': lit.lexical.push_back('\r'); break;
                case 'f': lit.lexical.push_back('\f'); break;
                case '"': lit.lexical.push_back('"'); break;
                case '\'': lit.lexical.push_back('\''); break;
                case '\\': lit.lexical.push_back('\\'); break;
                case 'u': append_utf8(lit.lexical, hex(4)); break;
                case 'U': append_utf8(lit.lexical, hex(8)); break;
                default: fail(std::string("invalid escape \\") + e);
            }
        }
        if (pos_ < s_.size() && s_[pos_] == '@') {
            ++pos_;
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) ++pos_;
            if (pos_ == start) fail("empty language tag");
            lit.language = std::string(s_.substr(start, pos_ - start));
        } else if (pos_ + 1 < s_.size() && s_[pos_] == '^' && s_[pos_ + 1] == '^') {
            pos_ += 2;
            lit.datatype = iri("datatype");
        }
        return lit;
    }

    std::string_view s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

// std::streambuf over a gzFile.
class GzStreamBuf : public std::streambuf {
public:
    explicit GzStreamBuf(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
        if (file_ == nullptr) throw IoError("cannot open '" + path + "'");
    }
    ~GzStreamBuf() override {
        if (file_ != nullptr) gzclose(file_);
    }
    GzStreamBuf(const GzStreamBuf&) = delete;
    GzStreamBuf& operator=(const GzStreamBuf&) = delete;

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        int n = gzread(file_, buf_.data(), static_cast<unsigned>(buf_.size()));
        if (n < 0) throw IoError("gzip stream is corrupt");
        if (n == 0) return traits_type::eof();
        setg(buf_.data(), buf_.data(), buf_.data() + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    gzFile file_;
    std::array<char, 1 << 16> buf_{};
};

}  // namespace detail

// Parses one statement. Comment and blank lines must be filtered by the caller.
inline Triple parse_ntriples_line(std::string_view line, std::size_t line_number) {
    return detail::LineParser(line, line_number).parse();
}

// Streams triples to `sink` in input order. In Abort mode the first malformed
// line throws ParseError; in Skip mode it is counted in `stats` instead.
inline void for_each_triple(std::istream& in, ParseMode mode,
                            const std::function<void(Triple&&)>& sink,
                            ParseStats* stats = nullptr) {
    ParseStats local;
    ParseStats& st = stats != nullptr ? *stats : local;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        ++st.lines;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            sink(parse_ntriples_line(line, number));
            ++st.triples;
        } catch (const ParseError& e) {
            if (mode == ParseMode::Abort) throw;
            ++st.malformed;
            if (st.first_errors.size() < 20) st.first_errors.push_back(e);
        }
    }
    if (in.bad()) throw IoError("read error after line " + std::to_string(number));
}

inline std::vector<Triple> parse_ntriples(std::istream& in, ParseMode mode = ParseMode::Abort,
                                          ParseStats* stats = nullptr) {
    std::vector<Triple> out;
    for_each_triple(in, mode, [&](Triple&& t) { out.push_back(std::move(t)); }, stats);
    return out;
}

inline bool is_gzip_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    return in.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
}

// Plain or gzip-compressed file, detected by magic bytes.
inline std::vector<Triple> read_ntriples_file(const std::string& path,
                                              ParseMode mode = ParseMode::Abort,
                                              ParseStats* stats = nullptr) {
    if (is_gzip_file(path)) {
        detail::GzStreamBuf buf(path);
        std::istream in(&buf);
        return parse_ntriples(in, mode, stats);
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_ntriples(in, mode, stats);
}

inline std::string escape_literal(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string to_ntriples_line(const Triple& t) {
    std::string out = "<" + t.subject + "> <" + t.predicate + "> ";
    if (t.object_is_iri()) {
        out += "<" + t.object_iri().value + ">";
    } else {
        const Literal& lit = t.object_literal();
        out += "\"" + escape_literal(lit.lexical) + "\"";
        if (!lit.language.empty()) out += "@" + lit.language;
        else if (!lit.datatype.empty()) out += "^^<" + lit.datatype + ">";
    }
    out += " .";
    return out;
}

}  // namespace scholink
