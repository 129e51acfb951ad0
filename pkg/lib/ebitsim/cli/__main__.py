"""
Invoked via ``python -m ebitsim.cli``.
"""

if __name__ == "__main__":
    from ebitsim.cli import cli
    cli(prog_name = "ebitsim")
