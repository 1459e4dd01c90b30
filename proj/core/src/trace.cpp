#include "shardsched/trace.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

namespace shardsched
{

namespace
{

class Fnv1a
{
public:
    void add(std::string_view s)
    {
        for (unsigned char c : s)
        {
            h_ ^= c;
            h_ *= 0x100000001b3ULL;
        }
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

} // namespace

void RunTrace::write_lines(std::ostream &os) const
{
    for (const auto &r : records)
    {
        os << r.time << ' ' << r.shard.value << ' ' << r.kind << ' ' << r.detail << '\n';
    }
}

std::uint64_t RunTrace::hash() const
{
    Fnv1a h;
    for (const auto &r : records)
    {
        h.add(std::to_string(r.time));
        h.add(" ");
        h.add(std::to_string(r.shard.value));
        h.add(" ");
        h.add(r.kind);
        h.add(" ");
        h.add(r.detail);
        h.add("\n");
    }
    for (std::size_t s = 0; s < chains.size(); ++s)
    {
        h.add("chain " + std::to_string(s));
        for (const auto &b : chains[s])
        {
            h.add(" [" + std::to_string(b.cluster.value) + ":" + std::to_string(b.seq) + "@" + std::to_string(b.time));
            for (TxnId t : b.txns)
            {
                h.add(" " + std::to_string(t.value));
            }
            h.add("]");
        }
        h.add("\n");
    }
    return h.value();
}

std::string hex_hash(std::uint64_t h)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace shardsched
