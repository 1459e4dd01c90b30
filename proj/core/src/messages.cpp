#include "shardsched/messages.hpp"

#include <sstream>

namespace shardsched
{

PriorityKey make_key(KeyOrder order, Tick ts, Height h, Color color, TxnId txn, std::uint32_t attempt)
{
    PriorityKey k;
    k.txn = txn;
    k.attempt = attempt;
    if (order == KeyOrder::ColorMajor)
    {
        k.fields = {color, ts, 0, 0};
    }
    else
    {
        k.fields = {ts, h.layer, h.sublayer, color};
    }
    return k;
}

namespace
{

struct KindName
{
    std::string_view operator()(const msg::Generate &) const { return "generate"; }
    std::string_view operator()(const msg::SubmitTxn &) const { return "submit"; }
    std::string_view operator()(const msg::ColorPending &) const { return "color"; }
    std::string_view operator()(const msg::SubTxn &) const { return "subtxn"; }
    std::string_view operator()(const msg::Cancel &) const { return "cancel"; }
    std::string_view operator()(const msg::Vote &) const { return "vote"; }
    std::string_view operator()(const msg::Confirm &) const { return "confirm"; }
    std::string_view operator()(const msg::Ignore &) const { return "ignore"; }
    std::string_view operator()(const msg::Ignored &) const { return "ignored"; }
    std::string_view operator()(const msg::Outcome &) const { return "outcome"; }
    std::string_view operator()(const msg::StateRequest &) const { return "state-request"; }
    std::string_view operator()(const msg::StateResponse &) const { return "state-response"; }
    std::string_view operator()(const msg::PrecommitBatch &) const { return "precommit-batch"; }
    std::string_view operator()(const msg::ApplyBatch &) const { return "apply-batch"; }
    std::string_view operator()(const msg::ControlRequest &) const { return "control-request"; }
    std::string_view operator()(const msg::ControlGrant &) const { return "control-grant"; }
    std::string_view operator()(const msg::Timer &) const { return "timer"; }
};

void key_text(std::ostream &os, const PriorityKey &k)
{
    os << '(' << k.fields[0] << ',' << k.fields[1] << ',' << k.fields[2] << ',' << k.fields[3] << ',' << k.txn.value << ')';
}

struct Summary
{
    std::ostringstream &os;

    void operator()(const msg::Generate &m) { os << "home=" << m.home; }
    void operator()(const msg::SubmitTxn &m) { os << "txn=" << m.txn << " cluster=" << m.cluster; }
    void operator()(const msg::ColorPending &m) { os << "cluster=" << m.cluster; }
    void operator()(const msg::SubTxn &m)
    {
        os << "txn=" << m.txn << " attempt=" << m.attempt << " key=";
        key_text(os, m.key);
    }
    void operator()(const msg::Cancel &m) { os << "txn=" << m.txn << " attempt=" << m.attempt; }
    void operator()(const msg::Vote &m)
    {
        os << "txn=" << m.txn << " attempt=" << m.attempt << " dest=" << m.dest << " hold=" << m.hold << (m.commit ? " commit" : " abort");
    }
    void operator()(const msg::Confirm &m) { os << "txn=" << m.txn << " attempt=" << m.attempt << (m.commit ? " commit" : " abort"); }
    void operator()(const msg::Ignore &m) { os << "txn=" << m.txn << " attempt=" << m.attempt << " dest=" << m.dest << " hold=" << m.hold; }
    void operator()(const msg::Ignored &m) { os << "txn=" << m.txn << " attempt=" << m.attempt << " hold=" << m.hold; }
    void operator()(const msg::Outcome &m) { os << "txn=" << m.txn << (m.committed ? " committed" : " aborted"); }
    void operator()(const msg::StateRequest &m) { os << "cluster=" << m.cluster << " round=" << m.round << " accounts=" << m.accounts.size(); }
    void operator()(const msg::StateResponse &m)
    {
        os << "cluster=" << m.cluster << " round=" << m.round << " from=" << m.from << " accounts=" << m.balances.size() << " applied=" << m.applied;
    }
    void operator()(const msg::PrecommitBatch &m)
    {
        os << "cluster=" << m.cluster << " dest=" << m.dest << " seq=" << m.seq << " txns=";
        for (std::size_t i = 0; i < m.entries.size(); ++i)
        {
            os << (i ? "," : "") << m.entries[i].txn;
        }
    }
    void operator()(const msg::ApplyBatch &m) { os << "cluster=" << m.cluster; }
    void operator()(const msg::ControlRequest &m) { os << "from=" << m.from << " to=" << m.to; }
    void operator()(const msg::ControlGrant &m) { os << "from=" << m.from << " to=" << m.to << (m.clean ? "" : " dirty"); }
    void operator()(const msg::Timer &m) { os << "cluster=" << m.cluster << " tag=" << m.tag; }
};

} // namespace

std::string_view kind_name(const Payload &p) { return std::visit(KindName{}, p); }

std::string summarize(const Payload &p)
{
    std::ostringstream os;
    std::visit(Summary{os}, p);
    return os.str();
}

} // namespace shardsched
