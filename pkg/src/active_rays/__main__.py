from .cli_main import app

if __name__ == "__main__":
    app()
