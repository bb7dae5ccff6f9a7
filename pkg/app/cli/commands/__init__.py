# CLI commands package initialization
