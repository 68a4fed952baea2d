# memory_cli.py
from memory.cli import cli

if __name__ == "__main__":
    cli(obj={})
