// Validates a document against the subset of JSON Schema used in docs/:
// type, const, enum, required, properties, additionalProperties (boolean),
// items, minItems, maxItems, minimum. Other keywords are ignored.
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pfsim::testing {

namespace detail {

inline bool has_type(const nlohmann::json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    if (type == "integer") return v.is_number_integer();
    if (type == "number") return v.is_number();
    return false;
}

inline void check(const nlohmann::json& schema, const nlohmann::json& v, const std::string& at,
                  std::vector<std::string>& errors) {
    if (const auto t = schema.find("type"); t != schema.end()) {
        bool ok = false;
        if (t->is_string()) {
            ok = has_type(v, t->get<std::string>());
        } else {
            for (const auto& name : *t) {
                ok = ok || has_type(v, name.get<std::string>());
            }
        }
        if (!ok) {
            errors.push_back(at + ": expected type " + t->dump() + ", got " + v.dump());
            return;
        }
    }
    if (const auto c = schema.find("const"); c != schema.end() && *c != v) {
        errors.push_back(at + ": expected " + c->dump());
    }
    if (const auto e = schema.find("enum"); e != schema.end()) {
        bool found = false;
        for (const auto& option : *e) {
            found = found || option == v;
        }
        if (!found) {
            errors.push_back(at + ": " + v.dump() + " not in " + e->dump());
        }
    }
    if (const auto m = schema.find("minimum"); m != schema.end() && v.is_number() &&
                                               v.get<double>() < m->get<double>()) {
        errors.push_back(at + ": below minimum " + m->dump());
    }
    if (v.is_object()) {
        if (const auto req = schema.find("required"); req != schema.end()) {
            for (const auto& key : *req) {
                if (!v.contains(key.get<std::string>())) {
                    errors.push_back(at + ": missing '" + key.get<std::string>() + "'");
                }
            }
        }
        const auto props = schema.find("properties");
        const auto extra = schema.find("additionalProperties");
        for (const auto& [key, child] : v.items()) {
            if (props != schema.end() && props->contains(key)) {
                check((*props)[key], child, at + "/" + key, errors);
            } else if (extra != schema.end() && extra->is_boolean() && !extra->get<bool>()) {
                errors.push_back(at + ": unexpected key '" + key + "'");
            }
        }
    }
    if (v.is_array()) {
        if (const auto lo = schema.find("minItems"); lo != schema.end() && v.size() < lo->get<std::size_t>()) {
            errors.push_back(at + ": fewer than " + lo->dump() + " items");
        }
        if (const auto hi = schema.find("maxItems"); hi != schema.end() && v.size() > hi->get<std::size_t>()) {
            errors.push_back(at + ": more than " + hi->dump() + " items");
        }
        if (const auto items = schema.find("items"); items != schema.end()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                check(*items, v[i], at + "/" + std::to_string(i), errors);
            }
        }
    }
}

}  // namespace detail

/// Empty when the document conforms.
inline std::vector<std::string> schema_errors(const nlohmann::json& schema, const nlohmann::json& doc) {
    std::vector<std::string> errors;
    detail::check(schema, doc, "", errors);
    return errors;
}

}  // namespace pfsim::testing
