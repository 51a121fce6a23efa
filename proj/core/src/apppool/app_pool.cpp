#include "appshare/apppool/app_pool.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/datagram.hpp"
#include "appshare/wire/text.hpp"

#include <fstream>
#include <sstream>

namespace appshare::apppool {

namespace {

// Entries end up inside reply datagrams, so they obey the same field rules.
bool datagram_safe(std::string_view field)
{
    return wire::is_field_safe(field);
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& why)
{
    throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + why);
}

} // namespace

AppPool AppPool::parse_manifest(std::string_view text)
{
    AppPool pool;
    std::size_t line_no = 0;
    for (auto raw : wire::split(text, "\n")) {
        ++line_no;
        const auto line = wire::trim(raw);
        if (line.empty() || line.front() == '#')
            continue;

        const auto fields = wire::split(line, "|");
        if (fields.size() != 3 && fields.size() != 4)
            parse_error(line_no, "expected app_name|full_path|username[|shared]");

        AppEntry entry;
        entry.app_name = std::string(wire::trim(fields[0]));
        entry.full_path = std::string(wire::trim(fields[1]));
        entry.username = std::string(wire::trim(fields[2]));
        if (fields.size() == 4) {
            const auto flag = wire::trim(fields[3]);
            if (flag == "shared")
                entry.shared = true;
            else if (flag != "unshared")
                parse_error(line_no, "sharing flag must be 'shared' or 'unshared'");
        }
        if (!datagram_safe(entry.app_name) || !datagram_safe(entry.full_path) || !datagram_safe(entry.username))
            parse_error(line_no, "fields must be non-empty UTF-8 without '//', newlines or a trailing '/'");

        pool.add(std::move(entry));
    }
    return pool;
}

AppPool AppPool::load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::ParseError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

std::string AppPool::to_manifest() const
{
    std::string out = "# app_name|full_path|username|shared\n";
    for (const auto& [name, e] : apps_)
        out += e.app_name + "|" + e.full_path + "|" + e.username + "|" + (e.shared ? "shared" : "unshared") + "\n";
    return out;
}

void AppPool::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::ParseError, "cannot write " + path.string());
    out << to_manifest();
}

void AppPool::add(AppEntry entry)
{
    if (entry.full_path.empty())
        throw Error(Errc::EmptyField, "full_path of " + entry.app_name);
    const auto name = entry.app_name;
    if (!apps_.try_emplace(name, std::move(entry)).second)
        throw Error(Errc::DuplicateApp, name);
}

void AppPool::set_shared(std::string_view app_name, bool shared)
{
    auto it = apps_.find(app_name);
    if (it == apps_.end())
        throw Error(Errc::UnknownApp, std::string(app_name));
    it->second.shared = shared;
}

const AppEntry* AppPool::find(std::string_view app_name) const
{
    auto it = apps_.find(app_name);
    return it == apps_.end() ? nullptr : &it->second;
}

std::vector<AppEntry> AppPool::entries() const
{
    std::vector<AppEntry> out;
    out.reserve(apps_.size());
    for (const auto& [name, e] : apps_)
        out.push_back(e);
    return out;
}

} // namespace appshare::apppool
