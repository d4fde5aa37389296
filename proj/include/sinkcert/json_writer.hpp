#pragma once

// Minimal JSON value + writer for every document this library emits.
// Reports must be byte-reproducible: insertion-ordered keys and floats
// printed with 17 significant digits (exact double round-trip), which rules
// out shortest-round-trip serializers.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sinkcert {

inline std::string format_double17(double x) {
    if (std::isnan(x)) return "null";  // never expected in reports; stay valid JSON
    if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class JsonValue {
public:
    using Array = std::vector<JsonValue>;
    using Object = std::vector<std::pair<std::string, JsonValue>>;

    JsonValue() : v_(nullptr) {}
    JsonValue(std::nullptr_t) : v_(nullptr) {}
    JsonValue(bool b) : v_(b) {}
    JsonValue(int i) : v_(static_cast<std::int64_t>(i)) {}
    JsonValue(long i) : v_(static_cast<std::int64_t>(i)) {}
    JsonValue(long long i) : v_(static_cast<std::int64_t>(i)) {}
    JsonValue(std::size_t i) : v_(static_cast<std::int64_t>(i)) {}
    JsonValue(double d) : v_(d) {}
    JsonValue(const char* s) : v_(std::string(s)) {}
    JsonValue(std::string s) : v_(std::move(s)) {}
    JsonValue(Array a) : v_(std::move(a)) {}
    JsonValue(Object o) : v_(std::move(o)) {}

    static JsonValue array() { return JsonValue(Array{}); }
    static JsonValue object() { return JsonValue(Object{}); }

    JsonValue& push_back(JsonValue x) {
        std::get<Array>(v_).push_back(std::move(x));
        return *this;
    }
    JsonValue& set(std::string key, JsonValue x) {
        std::get<Object>(v_).emplace_back(std::move(key), std::move(x));
        return *this;
    }

    void dump(std::string& out, int indent, int depth) const {
        const std::string pad((depth + 1) * indent, ' ');
        const std::string close_pad(depth * indent, ' ');
        switch (v_.index()) {
            case 0: out += "null"; break;
            case 1: out += std::get<bool>(v_) ? "true" : "false"; break;
            case 2: out += std::to_string(std::get<std::int64_t>(v_)); break;
            case 3: out += format_double17(std::get<double>(v_)); break;
            case 4: append_escaped(out, std::get<std::string>(v_)); break;
            case 5: {
                const auto& a = std::get<Array>(v_);
                if (a.empty()) { out += "[]"; break; }
                out += "[\n";
                for (std::size_t i = 0; i < a.size(); ++i) {
                    out += pad;
                    a[i].dump(out, indent, depth + 1);
                    if (i + 1 < a.size()) out += ',';
                    out += '\n';
                }
                out += close_pad + "]";
                break;
            }
            case 6: {
                const auto& o = std::get<Object>(v_);
                if (o.empty()) { out += "{}"; break; }
                out += "{\n";
                for (std::size_t i = 0; i < o.size(); ++i) {
                    out += pad;
                    append_escaped(out, o[i].first);
                    out += ": ";
                    o[i].second.dump(out, indent, depth + 1);
                    if (i + 1 < o.size()) out += ',';
                    out += '\n';
                }
                out += close_pad + "}";
                break;
            }
        }
    }

    std::string dump(int indent = 2) const {
        std::string out;
        dump(out, indent, 0);
        out += '\n';
        return out;
    }

private:
    static void append_escaped(std::string& out, const std::string& s) {
        out += '"';
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }

    std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> v_;
};

}  // namespace sinkcert
