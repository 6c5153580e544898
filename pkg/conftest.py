# Makes pytest put the repository root on sys.path so `testing.*` imports resolve.
