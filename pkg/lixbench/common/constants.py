# -*- coding: utf-8 -*-


# -------------------------------------
# key space
# -------------------------------------
KEY_BITS = 64
MAX_KEY = (1<<KEY_BITS) - 1
KEY_SENTINEL = 1<<KEY_BITS  # larger than any valid key, fills trailing gaps

KEY_BYTES = 8
PAYLOAD_BYTES = 8
RECORD_BYTES = KEY_BYTES + PAYLOAD_BYTES
POINTER_BYTES = 8
LOCK_WORD_BYTES = 8


# -------------------------------------
# hardness
# -------------------------------------
GLOBAL_EPSILON = 4096   # coarse PLA: macro structure of the CDF
LOCAL_EPSILON = 32      # fine PLA: per-model difficulty
FEASIBILITY_SLACK = 1e-6


# -------------------------------------
# node accounting (bytes)
# -------------------------------------
DATA_NODE_HEADER = 96   # model, counters, density bounds, sibling links
INNER_NODE_HEADER = 64  # model, fanout, shared-exclusive lock
CHAIN_NODE_HEADER = 96  # model, path statistics, sizes, bitmaps pointers
BTREE_NODE_HEADER = 32

KB = 1024
MB = 1024 * KB


# -------------------------------------
# sync
# -------------------------------------
SPIN_LIMIT = 64         # spins before backing off
MAX_BACKOFF = 1024      # upper bound of busy-wait iterations per backoff round
RECLAIM_INTERVAL = 256  # retirements between epoch advance attempts
