"""Codes shared by both kernel backends."""

STAT_BRANCHES = 0
STAT_AT_LEAST = 1
STAT_EXACTLY = 2
STAT_DEPTH = 3
STAT_POSITION = 4

ERR_BRANCHES = 1    # root degree above the pile count
ERR_DEGREE = 2      # some node has more children than piles
ERR_DEPTH = 3       # tree walk and key scan disagree on the depth of n
ERR_INCREASING = 4  # a parent label is not smaller than its child
ERR_STATISTIC = 5   # fast statistic disagrees with the one read off the built tree

ERROR_MESSAGES = {
    ERR_BRANCHES: "root has more children than there are piles",
    ERR_DEGREE: "a node has more children than there are piles",
    ERR_DEPTH: "depth of n from the tree differs from the anti-record scan",
    ERR_INCREASING: "tree is not increasing along root paths",
    ERR_STATISTIC: "streamed statistic differs from the value on the built tree",
}
