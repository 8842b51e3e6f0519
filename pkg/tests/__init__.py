# Tests for perm_converse
