"""Message transports: a deterministic simulator and TCP."""
