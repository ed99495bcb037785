#pragma once

// Bidirectional maps between semantic decision-variable / constraint keys
// and LP column / row ids, plus the flat array indexing shared by the
// formulation, the solution extraction, and the auditors.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridplan/scenario.hpp"

namespace gridplan {

enum class VarKind : std::uint8_t {
    gen_build,      // MW of generation capacity added (epoch, zone, tech)
    stor_build,     // MW of storage power capacity added (epoch, zone, tech)
    line_build,     // MW of corridor reinforcement (epoch, corridor)
    gen_dispatch,   // MWh generated (epoch, zone, tech, hour)
    stor_discharge, // MWh discharged (epoch, zone, tech, hour)
    stor_charge,    // MWh consumed charging (epoch, zone, tech, hour)
    soc,            // state of charge at the end of the hour
    flow,           // MW on a corridor, positive from -> to (epoch, corridor, hour)
    unserved,       // MWh of load left unmet (epoch, zone, hour)
    rec             // renewable credits = annual generation (epoch, zone, tech)
};

enum class RowKind : std::uint8_t {
    gen_limit,
    stor_discharge_cap,
    stor_charge_cap,
    soc_cap,
    soc_initial,
    soc_final,
    soc_step,
    flow_upper,
    flow_lower,
    balance,          // zonal (epoch, zone, hour)
    balance_regional, // copper plate (epoch, hour)
    rec_definition,
    rps_regional,    // (epoch, policy class)
    rps_instate,     // (epoch, zone)
    target_gen,      // (epoch, tech class, state-subset mask)
    target_stor,     // (epoch, state-subset mask)
    elcc_target,     // (epoch)
    build_limit_gen, // (zone, tech)
    build_limit_stor,
    reinforcement_cap // (corridor)
};

// a = epoch (or zone for build limits), b = zone / corridor / class,
// c = tech / subset mask, h = hour; unused fields stay -1
template <typename Kind>
struct IndexKey {
    Kind kind{};
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t c = -1;
    std::int32_t h = -1;

    bool operator==(const IndexKey&) const = default;

    std::uint64_t encoded() const
    {
        // disjoint fields: 5 bits kind, 12 bits a, 12 bits b, 18 bits c
        // (subset masks reach 2^16), 17 bits h
        return (static_cast<std::uint64_t>(kind) << 59) |
               ((static_cast<std::uint64_t>(a + 1) & 0xfffull) << 47) |
               ((static_cast<std::uint64_t>(b + 1) & 0xfffull) << 35) |
               ((static_cast<std::uint64_t>(c + 1) & 0x3ffffull) << 17) |
               (static_cast<std::uint64_t>(h + 1) & 0x1ffffull);
    }
};

using VarKey = IndexKey<VarKind>;
using RowKey = IndexKey<RowKind>;

template <typename Key>
class KeyIndex {
  public:
    // register the key for the next sequential id; ids must match the LP
    void add_at(const Key& key, int id)
    {
        if (id != static_cast<int>(keys_.size())) {
            throw std::logic_error("key index out of sync with the program");
        }
        auto [it, inserted] = by_key_.emplace(key.encoded(), id);
        if (!inserted) {
            throw std::logic_error("duplicate key in index");
        }
        keys_.push_back(key);
    }

    std::optional<int> find(const Key& key) const
    {
        auto it = by_key_.find(key.encoded());
        if (it == by_key_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    int at(const Key& key) const
    {
        auto id = find(key);
        if (!id) {
            throw std::out_of_range("key not present in index");
        }
        return *id;
    }

    const Key& key_of(int id) const { return keys_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(keys_.size()); }

    // bijectivity against a program with `count` columns/rows
    bool is_bijection(int count) const
    {
        if (count != size() || by_key_.size() != keys_.size()) {
            return false;
        }
        for (int id = 0; id < size(); ++id) {
            auto found = find(keys_[static_cast<std::size_t>(id)]);
            if (!found || *found != id) {
                return false;
            }
        }
        return true;
    }

  private:
    std::vector<Key> keys_;
    std::unordered_map<std::uint64_t, int> by_key_;
};

using VariableIndex = KeyIndex<VarKey>;
using RowIndex = KeyIndex<RowKey>;

// Flat array layout over scenario dimensions.
struct Dims {
    int E = 0, Z = 0, G = 0, S = 0, L = 0;
    std::vector<int> H;                  // hours per epoch
    std::vector<std::size_t> hour_base;  // cumulative hour offset per epoch
    std::size_t total_hours = 0;

    Dims() = default;
    explicit Dims(const Scenario& sc)
        : E(sc.num_epochs()), Z(sc.num_zones()), G(static_cast<int>(sc.gen_techs.size())),
          S(static_cast<int>(sc.stor_techs.size())), L(static_cast<int>(sc.corridors.size()))
    {
        H.resize(static_cast<std::size_t>(E));
        hour_base.resize(static_cast<std::size_t>(E));
        std::size_t acc = 0;
        for (int e = 0; e < E; ++e) {
            H[static_cast<std::size_t>(e)] = sc.hours(e);
            hour_base[static_cast<std::size_t>(e)] = acc;
            acc += static_cast<std::size_t>(sc.hours(e));
        }
        total_hours = acc;
    }

    std::size_t ezg(int e, int z, int g) const
    {
        return (static_cast<std::size_t>(e) * static_cast<std::size_t>(Z) + static_cast<std::size_t>(z)) *
                   static_cast<std::size_t>(G) +
               static_cast<std::size_t>(g);
    }
    std::size_t ezs(int e, int z, int s) const
    {
        return (static_cast<std::size_t>(e) * static_cast<std::size_t>(Z) + static_cast<std::size_t>(z)) *
                   static_cast<std::size_t>(S) +
               static_cast<std::size_t>(s);
    }
    std::size_t el(int e, int l) const
    {
        return static_cast<std::size_t>(e) * static_cast<std::size_t>(L) + static_cast<std::size_t>(l);
    }
    std::size_t ezgh(int e, int z, int g, int h) const
    {
        return ((hour_base[static_cast<std::size_t>(e)] + static_cast<std::size_t>(h)) * static_cast<std::size_t>(Z) +
                static_cast<std::size_t>(z)) *
                   static_cast<std::size_t>(G) +
               static_cast<std::size_t>(g);
    }
    std::size_t ezsh(int e, int z, int s, int h) const
    {
        return ((hour_base[static_cast<std::size_t>(e)] + static_cast<std::size_t>(h)) * static_cast<std::size_t>(Z) +
                static_cast<std::size_t>(z)) *
                   static_cast<std::size_t>(S) +
               static_cast<std::size_t>(s);
    }
    std::size_t elh(int e, int l, int h) const
    {
        return (hour_base[static_cast<std::size_t>(e)] + static_cast<std::size_t>(h)) * static_cast<std::size_t>(L) +
               static_cast<std::size_t>(l);
    }
    std::size_t ezh(int e, int z, int h) const
    {
        return (hour_base[static_cast<std::size_t>(e)] + static_cast<std::size_t>(h)) * static_cast<std::size_t>(Z) +
               static_cast<std::size_t>(z);
    }

    std::size_t n_ezg() const { return static_cast<std::size_t>(E) * static_cast<std::size_t>(Z) * static_cast<std::size_t>(G); }
    std::size_t n_ezs() const { return static_cast<std::size_t>(E) * static_cast<std::size_t>(Z) * static_cast<std::size_t>(S); }
    std::size_t n_el() const { return static_cast<std::size_t>(E) * static_cast<std::size_t>(L); }
    std::size_t n_ezgh() const { return total_hours * static_cast<std::size_t>(Z) * static_cast<std::size_t>(G); }
    std::size_t n_ezsh() const { return total_hours * static_cast<std::size_t>(Z) * static_cast<std::size_t>(S); }
    std::size_t n_elh() const { return total_hours * static_cast<std::size_t>(L); }
    std::size_t n_ezh() const { return total_hours * static_cast<std::size_t>(Z); }
};

} // namespace gridplan
