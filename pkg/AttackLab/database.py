import os

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

# run registry; any SQLAlchemy URL works, sqlite is the local default
SQLALCHEMY_DATABASE_URL = os.getenv('ATTACKLAB_DATABASE_URL', 'sqlite:///./attacklab.db')

connect_args = {'check_same_thread': False} if SQLALCHEMY_DATABASE_URL.startswith('sqlite') else {}
engine = create_engine(SQLALCHEMY_DATABASE_URL, connect_args=connect_args)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()
