import os

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from .database import engine
from .models import Base
from .routers import oracle, runs

app = FastAPI(title='AttackLab')

# comma-separated origins allowed to read the registry from a browser
ALLOWED_ORIGINS = os.getenv('ATTACKLAB_CORS_ORIGINS', 'http://localhost:3000').split(',')

app.add_middleware(
    CORSMiddleware,
    allow_origins=[origin.strip() for origin in ALLOWED_ORIGINS],
    allow_credentials=True,
    allow_methods=['*'],
    allow_headers=['*'],
)

Base.metadata.create_all(bind=engine)


@app.get('/')
def root():
    return {'message': 'AttackLab API is running!'}


@app.get('/healthy')
def health_check():
    return {'status': 'Healthy'}


app.include_router(runs.router)
app.include_router(oracle.router)
