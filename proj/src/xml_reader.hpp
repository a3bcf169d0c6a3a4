#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssaudit::detail {

class XmlError : public std::runtime_error {
public:
    XmlError(std::int64_t offset, const std::string& what) : std::runtime_error(what), offset_(offset) {}
    std::int64_t offset() const { return offset_; }

private:
    std::int64_t offset_;
};

using XmlAttributes = std::vector<std::pair<std::string_view, std::string_view>>;

std::optional<std::string_view> find_attr(const XmlAttributes& attrs, std::string_view local_name);

/// Streaming callbacks. Element and attribute names arrive with any
/// namespace prefix stripped ("x:c" -> "c").
class XmlHandler {
public:
    virtual ~XmlHandler() = default;
    virtual void on_start(std::string_view name, const XmlAttributes& attrs) = 0;
    virtual void on_end(std::string_view name) = 0;
    virtual void on_text(std::string_view text) = 0;
    /// Byte offset of the event being delivered; valid only inside callbacks.
    std::int64_t current_offset() const { return offset_; }

private:
    friend struct XmlParserAccess;
    std::int64_t offset_ = 0;
};

/// Parses a whole document. Exceptions thrown by the handler propagate
/// after the parser is stopped; malformed XML raises XmlError.
void parse_xml(std::string_view document, XmlHandler& handler);

struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<XmlNode> children;
    std::string text;

    std::optional<std::string_view> attr(std::string_view local_name) const;
    const XmlNode* child(std::string_view local_name) const;
    std::vector<const XmlNode*> children_named(std::string_view local_name) const;
    /// Concatenated text of this node and all descendants, in document order.
    std::string deep_text(std::string_view only_within = {}) const;
};

XmlNode parse_xml_tree(std::string_view document);

}  // namespace ssaudit::detail
