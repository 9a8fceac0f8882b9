def main():
    things = ["garden", "beeper", "planet"]
    for thing in things:
        if len(thing) > 5:
            print(thing.upper())
    print(len(things))

if __name__ == "__main__":
    main()
