#pragma once

// Minimal network of ApNode / LpNode instances for protocol tests. Every message
// goes through encode_frame / decode_frame. Delivery order is up to the caller:
// FIFO per (from, to) link, arbitrary across links.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoserve/ap_node.hpp"
#include "autoserve/lp_node.hpp"
#include "autoserve/wire/frame.hpp"

namespace testbus {

using namespace autoserve;

struct Packet
{
    std::uint8_t from;
    std::uint8_t to;
    std::vector<std::uint8_t> frame;
};

class Network
{
public:
    explicit Network(std::vector<LpSite> roster) : roster_(std::move(roster))
    {
        for (const auto& site : roster_) {
            LpConfig c;
            c.sys_id = site.sys_id;
            c.position = site.position;
            c.roster = roster_;
            auto lp = std::make_unique<LpNode>(c);
            const auto id = site.sys_id;
            lp->set_observer([this, id](LpState from, LpState to, double) {
                if (!is_legal_transition(from, to)) {
                    ++illegal;
                }
                lp_log.push_back({id, from, to});
            });
            lps_[id] = std::move(lp);
        }
    }

    ApNode& add_ap(std::uint8_t id, ApConfig c = {})
    {
        c.sys_id = id;
        c.roster = roster_;
        auto ap = std::make_unique<ApNode>(c);
        ap->set_observer([this, id](ApState from, ApState to, double) {
            if (!is_legal_transition(from, to)) {
                ++illegal;
            }
            ap_log.push_back({id, from, to});
        });
        auto& ref = *ap;
        aps_[id] = std::move(ap);
        return ref;
    }

    LpNode& lp(std::uint8_t id) { return *lps_.at(id); }
    ApNode& ap(std::uint8_t id) { return *aps_.at(id); }
    const std::map<std::uint8_t, std::unique_ptr<ApNode>>& aps() const { return aps_; }
    const std::map<std::uint8_t, std::unique_ptr<LpNode>>& lps() const { return lps_; }

    void post(std::uint8_t from, const std::vector<Outbound>& out)
    {
        for (const auto& o : out) {
            auto frame = wire::encode_frame(o.msg, seq_[from]++, from, 1);
            if (o.to == BroadcastId) {
                const bool from_lp = lps_.contains(from);
                if (from_lp) {
                    for (const auto& [id, _] : aps_) {
                        links_[{from, id}].push_back({from, id, frame});
                    }
                } else {
                    for (const auto& [id, _] : lps_) {
                        links_[{from, id}].push_back({from, id, frame});
                    }
                }
            } else {
                links_[{from, o.to}].push_back({from, o.to, frame});
            }
            sent.push_back(o);
            sent_from.push_back(from);
        }
    }

    /// Links with at least one packet waiting.
    std::vector<std::pair<std::uint8_t, std::uint8_t>> busy_links() const
    {
        std::vector<std::pair<std::uint8_t, std::uint8_t>> v;
        for (const auto& [k, q] : links_) {
            if (!q.empty()) {
                v.push_back(k);
            }
        }
        return v;
    }

    struct Delivery
    {
        std::uint8_t from;
        std::uint8_t to;
        wire::Message msg;
        std::vector<Outbound> replies;
    };

    /// Delivers the oldest packet on one link; replies are posted.
    Delivery deliver_one(std::pair<std::uint8_t, std::uint8_t> link, double now)
    {
        auto& q = links_.at(link);
        const auto p = q.front();
        q.pop_front();
        const auto d = wire::decode_frame(p.frame);
        std::vector<Outbound> replies;
        if (auto it = lps_.find(p.to); it != lps_.end()) {
            replies = it->second->handle_message(d.header.sys_id, d.message, now);
        } else if (auto jt = aps_.find(p.to); jt != aps_.end()) {
            replies = jt->second->handle_message(d.header.sys_id, d.message, now);
        } else {
            throw std::logic_error("no node " + std::to_string(p.to));
        }
        post(p.to, replies);
        return {p.from, p.to, d.message, std::move(replies)};
    }

    /// Delivers until every link is empty, oldest link first. Returns packets delivered.
    std::size_t drain(double now, std::size_t limit = 100000)
    {
        std::size_t n = 0;
        for (auto links = busy_links(); !links.empty(); links = busy_links()) {
            for (const auto& l : links) {
                deliver_one(l, now);
                if (++n > limit) {
                    throw std::runtime_error("drain did not converge");
                }
            }
        }
        return n;
    }

    /// Number of LPs that hold `ap` (queued or current).
    std::size_t holders(std::uint8_t ap) const
    {
        std::size_t n = 0;
        for (const auto& [_, lp] : lps_) {
            n += lp->holds(ap) ? 1 : 0;
        }
        return n;
    }

    template <class S>
    struct Change
    {
        std::uint8_t id;
        S from;
        S to;
    };

    std::vector<Change<LpState>> lp_log;
    std::vector<Change<ApState>> ap_log;
    std::vector<Outbound> sent;
    std::vector<std::uint8_t> sent_from;
    std::size_t illegal = 0;

private:
    std::vector<LpSite> roster_;
    std::map<std::uint8_t, std::unique_ptr<LpNode>> lps_;
    std::map<std::uint8_t, std::unique_ptr<ApNode>> aps_;
    std::map<std::pair<std::uint8_t, std::uint8_t>, std::deque<Packet>> links_;
    std::map<std::uint8_t, std::uint8_t> seq_;
};

}  // namespace testbus
