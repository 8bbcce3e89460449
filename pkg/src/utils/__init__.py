"""Services: symbols, decisions, configuration, caching and error handling."""
