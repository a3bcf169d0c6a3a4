#include "xml_reader.hpp"

#include <expat.h>

#include <exception>
#include <memory>

namespace ssaudit::detail {

namespace {

std::string_view local_name(const char* name) {
    std::string_view n(name);
    if (auto colon = n.rfind(':'); colon != std::string_view::npos) n.remove_prefix(colon + 1);
    return n;
}

struct ParserDeleter {
    void operator()(XML_ParserStruct* p) const { XML_ParserFree(p); }
};

}  // namespace

struct XmlParserAccess {
    XML_Parser parser;
    XmlHandler* handler;
    std::exception_ptr failure;
    XmlAttributes attrs;

    void sync() { handler->offset_ = XML_GetCurrentByteIndex(parser); }

    template <typename F>
    void guarded(F&& f) {
        if (failure) return;
        try {
            sync();
            f();
        } catch (...) {
            failure = std::current_exception();
            XML_StopParser(parser, XML_FALSE);
        }
    }

    static void XMLCALL start(void* ud, const XML_Char* name, const XML_Char** atts) {
        auto* self = static_cast<XmlParserAccess*>(ud);
        self->guarded([&] {
            self->attrs.clear();
            for (std::size_t i = 0; atts[i]; i += 2) self->attrs.emplace_back(local_name(atts[i]), atts[i + 1]);
            self->handler->on_start(local_name(name), self->attrs);
        });
    }
    static void XMLCALL end(void* ud, const XML_Char* name) {
        auto* self = static_cast<XmlParserAccess*>(ud);
        self->guarded([&] { self->handler->on_end(local_name(name)); });
    }
    static void XMLCALL text(void* ud, const XML_Char* s, int len) {
        auto* self = static_cast<XmlParserAccess*>(ud);
        self->guarded([&] { self->handler->on_text(std::string_view(s, static_cast<std::size_t>(len))); });
    }
};

std::optional<std::string_view> find_attr(const XmlAttributes& attrs, std::string_view name) {
    for (const auto& [k, v] : attrs) {
        if (k == name) return v;
    }
    return std::nullopt;
}

void parse_xml(std::string_view document, XmlHandler& handler) {
    std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
    if (!parser) throw XmlError(0, "cannot create XML parser");
    XmlParserAccess access{parser.get(), &handler, nullptr, {}};
    XML_SetUserData(parser.get(), &access);
    XML_SetElementHandler(parser.get(), &XmlParserAccess::start, &XmlParserAccess::end);
    XML_SetCharacterDataHandler(parser.get(), &XmlParserAccess::text);

    // Feed in chunks so sizes beyond INT_MAX never reach expat in one call.
    constexpr std::size_t kChunk = 1 << 24;
    std::size_t pos = 0;
    do {
        std::size_t n = std::min(kChunk, document.size() - pos);
        bool last = pos + n == document.size();
        auto status = XML_Parse(parser.get(), document.data() + pos, static_cast<int>(n), last ? XML_TRUE : XML_FALSE);
        if (access.failure) std::rethrow_exception(access.failure);
        if (status != XML_STATUS_OK) {
            throw XmlError(XML_GetCurrentByteIndex(parser.get()),
                           XML_ErrorString(XML_GetErrorCode(parser.get())));
        }
        pos += n;
    } while (pos < document.size());
}

namespace {

class TreeBuilder final : public XmlHandler {
public:
    XmlNode root;

    void on_start(std::string_view name, const XmlAttributes& attrs) override {
        XmlNode node;
        node.name = std::string(name);
        for (const auto& [k, v] : attrs) node.attrs.emplace_back(std::string(k), std::string(v));
        if (stack_.empty()) {
            root = std::move(node);
            stack_.push_back(&root);
        } else {
            stack_.back()->children.push_back(std::move(node));
            stack_.push_back(&stack_.back()->children.back());
        }
    }
    void on_end(std::string_view) override { stack_.pop_back(); }
    void on_text(std::string_view text) override {
        if (!stack_.empty()) stack_.back()->text.append(text);
    }

private:
    // Pointers stay valid: a node's children vector only grows while that
    // node is the innermost open element.
    std::vector<XmlNode*> stack_;
};

void collect_text(const XmlNode& node, std::string_view only_within, bool inside, std::string& out) {
    bool now_inside = inside || only_within.empty() || node.name == only_within;
    if (now_inside) out += node.text;
    for (const auto& c : node.children) collect_text(c, only_within, now_inside, out);
}

}  // namespace

std::optional<std::string_view> XmlNode::attr(std::string_view local) const {
    for (const auto& [k, v] : attrs) {
        if (k == local) return std::string_view(v);
    }
    return std::nullopt;
}

const XmlNode* XmlNode::child(std::string_view local) const {
    for (const auto& c : children) {
        if (c.name == local) return &c;
    }
    return nullptr;
}

std::vector<const XmlNode*> XmlNode::children_named(std::string_view local) const {
    std::vector<const XmlNode*> out;
    for (const auto& c : children) {
        if (c.name == local) out.push_back(&c);
    }
    return out;
}

std::string XmlNode::deep_text(std::string_view only_within) const {
    std::string out;
    collect_text(*this, only_within, false, out);
    return out;
}

XmlNode parse_xml_tree(std::string_view document) {
    TreeBuilder builder;
    parse_xml(document, builder);
    return std::move(builder.root);
}

}  // namespace ssaudit::detail
