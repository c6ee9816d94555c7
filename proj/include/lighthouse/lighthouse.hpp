#pragma once

#include "adversary.hpp"
#include "bias.hpp"
#include "config.hpp"
#include "contract.hpp"
#include "digest.hpp"
#include "events.hpp"
#include "hash.hpp"
#include "keccak.hpp"
#include "ledger.hpp"
#include "merlin.hpp"
#include "pulse.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "single_contract.hpp"
#include "tx.hpp"
#include "verify.hpp"
