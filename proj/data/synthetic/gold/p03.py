from karel.stanfordkarel import *

def main():
    for i in range(2):
        if beepers_present():
            pick_beeper()
        move()
    turn_left()

def turn_right():
    for i in range(3):
        turn_left()
