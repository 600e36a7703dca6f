import sys

from app.cli import main

# `python app.py serve` starts the HTTP API; anything else is a CLI command
if __name__ == "__main__":
    if sys.argv[1:2] == ["serve"]:
        import uvicorn
        from app.main import app

        uvicorn.run(app, host="0.0.0.0", port=8000)
    else:
        sys.exit(main())
