"""Word-character embedding intent classifier."""
