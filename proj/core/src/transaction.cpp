#include "shardsched/transaction.hpp"

namespace shardsched
{

std::string_view to_string(TxnStatus s)
{
    switch (s)
    {
    case TxnStatus::Pending:
        return "pending";
    case TxnStatus::Scheduled:
        return "scheduled";
    case TxnStatus::Precommitted:
        return "precommitted";
    case TxnStatus::Committed:
        return "committed";
    case TxnStatus::Aborted:
        return "aborted";
    }
    return "?";
}

std::vector<ShardId> Transaction::destinations() const
{
    std::vector<ShardId> out;
    out.reserve(accesses.size());
    for (const auto &a : accesses)
    {
        out.push_back(a.shard);
    }
    return out;
}

const ShardAccess *Transaction::access(ShardId shard) const
{
    for (const auto &a : accesses)
    {
        if (a.shard == shard)
        {
            return &a;
        }
    }
    return nullptr;
}

std::vector<SubTransaction> split(const Transaction &t)
{
    std::vector<SubTransaction> out;
    out.reserve(t.accesses.size());
    for (const auto &a : t.accesses)
    {
        out.push_back(SubTransaction{t.id, a.shard, a.reads, a.writes});
    }
    return out;
}

} // namespace shardsched
