# CLI package initialization
