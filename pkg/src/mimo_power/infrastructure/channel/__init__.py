"""Monte-Carlo channel simulation."""
